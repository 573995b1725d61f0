use std::collections::BTreeMap;

use psaws_core::families::{Family, NuisanceParams};
use serde::Serialize;

use crate::args::FamiliesArgs;
use crate::error::CliResult;
use crate::io;

#[derive(Serialize)]
struct Entry {
    name: &'static str,
    discrete: bool,
    domain: String,
    statistic: &'static str,
    c: &'static str,
    b: &'static str,
    nuisance: BTreeMap<&'static str, f64>,
}

pub fn run(a: &FamiliesArgs) -> CliResult<()> {
    let entries = Family::NAMES
        .iter()
        .map(|name| {
            let f = Family::by_name(name, &NuisanceParams::default())?;
            let (t, c, b) = f.describe_tcb();
            Ok(Entry {
                name: f.name(),
                discrete: f.is_discrete(),
                domain: f.domain().describe(),
                statistic: t,
                c,
                b,
                nuisance: f.nuisance().into_iter().collect(),
            })
        })
        .collect::<psaws_core::Result<Vec<_>>>()?;
    io::emit(a.output.as_deref(), &io::json_document("families", &entries)?)
}

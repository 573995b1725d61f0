use psaws_core::scenarios::{demo_smoother, gaussian_observations, mse_trace, test_function};

use super::num;
use crate::args::{DemoArgs, TestFunction};
use crate::error::CliResult;
use crate::io;

pub fn run(a: &DemoArgs) -> CliResult<()> {
    let (name, default_lambda) = match a.function {
        TestFunction::Theta1 => ("theta1", 14.6),
        TestFunction::Theta2 => ("theta2", 16.0),
    };
    let lambda = a.lambda.unwrap_or(default_lambda);
    let truth = test_function(name)?;
    let data = gaussian_observations(&truth, 1.0, a.seed.seed)?;
    let smoother = demo_smoother(lambda)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let keep = a.output.is_some();
    let trace = mse_trace(&smoother, &data, &truth, |s| {
        if keep {
            for i in 0..s.len() {
                rows.push(vec![
                    s.k.to_string(),
                    i.to_string(),
                    num(s.theta_tilde[i]),
                    num(s.n_tilde[i]),
                    num(s.n_bar[i]),
                ]);
            }
        }
    })?;
    if let Some(path) = &a.output {
        let bytes = io::csv_bytes(&["k", "index", "theta_tilde", "n_tilde", "n_bar"], rows)?;
        io::write_atomic(path, &bytes)?;
    }
    let table = io::csv_bytes(
        &["k", "h", "mse", "mse_interior"],
        trace.mse.iter().enumerate().map(|(k, &m)| {
            vec![
                k.to_string(),
                num(trace.bandwidths[k]),
                num(m),
                trace.mse_interior[k].map(num).unwrap_or_default(),
            ]
        }),
    )?;
    io::emit(a.mse.as_deref(), &table)
}

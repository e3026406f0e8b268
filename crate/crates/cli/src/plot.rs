//! Gnuplot scripts that render the CSV outputs of each command.
//!
//! Scripts reference their CSV files by bare name and are meant to be run
//! from the output directory: `cd out && gnuplot ocp.gp` writes `ocp.svg`.

use std::fmt::Write as _;
use std::path::Path;

use unemp::ocp::Weights;

use crate::data::Metadata;
use crate::format::num;

struct Script {
    text: String,
}

impl Script {
    fn new(meta: &Metadata, stem: &str, width: u32, height: u32) -> Self {
        let mut text = meta.comment_line();
        let _ = writeln!(text, "# Render with: gnuplot {stem}.gp");
        let _ = writeln!(text, "set terminal svg size {width},{height} dynamic enhanced");
        let _ = writeln!(text, "set output '{stem}.svg'");
        text.push_str("set datafile separator ','\n");
        text.push_str("set datafile columnheaders\n");
        text.push_str("set grid\nset key top right\n");
        Script { text }
    }

    fn line(&mut self, s: &str) -> &mut Self {
        self.text.push_str(s);
        self.text.push('\n');
        self
    }

    fn panel(&mut self, title: &str, ylabel: &str, plots: &[String]) -> &mut Self {
        let _ = writeln!(self.text, "set title '{title}'");
        let _ = writeln!(self.text, "set ylabel '{ylabel}'");
        let _ = writeln!(self.text, "plot {}", plots.join(", \\\n     "));
        self
    }

    fn finish(mut self) -> String {
        self.text.push_str("unset multiplot\nunset output\n");
        self.text
    }
}

fn quoted(path: &Path) -> String {
    path.display().to_string().replace('\'', "''")
}

/// Model trajectory, optionally overlaid with observed data. Data months
/// `t = 1, 2, ...` are drawn at model time `t - 1`.
pub fn simulation(meta: &Metadata, baseline: bool, data: Option<&Path>) -> String {
    let mut s = Script::new(meta, "simulation", 1000, if baseline { 1100 } else { 800 });
    s.line(if baseline {
        "set multiplot layout 3,1"
    } else {
        "set multiplot layout 2,1"
    });
    s.line("set xlabel 't (months)'");
    let data = data.map(quoted);
    let mut stock = vec![
        "'simulation.csv' using 1:2 with lines lw 2 title 'U (model)'".to_string(),
        "'simulation.csv' using 1:3 with lines lw 2 title 'E (model)'".to_string(),
    ];
    if let Some(d) = &data {
        stock.push(format!("'{d}' using ($1-1):2 with lines dt 2 lw 2 title 'U (data)'"));
    }
    s.panel("Unemployed and employed", "persons", &stock);
    if baseline {
        let mut vac = vec!["'simulation.csv' using 1:4 with lines lw 2 title 'V (model)'".to_string()];
        if let Some(d) = &data {
            vac.push(format!("'{d}' using ($1-1):4 with lines dt 2 lw 2 title 'V (data)'"));
        }
        s.panel("Vacancies", "vacancies", &vac);
    }
    let rate_col = if baseline { 5 } else { 4 };
    let mut rate = vec![format!(
        "'simulation.csv' using 1:{rate_col} with lines lw 2 title 'rate (model)'"
    )];
    if let Some(d) = &data {
        rate.push(format!("'{d}' using ($1-1):3 with lines dt 2 lw 2 title 'rate (data)'"));
    }
    s.panel("Unemployment rate", "U / (U + E)", &rate);
    s.finish()
}

/// Observed vacancies against the fitted Fourier series.
pub fn fit(meta: &Metadata) -> String {
    let mut s = Script::new(meta, "fit", 1000, 800);
    s.line("set multiplot layout 2,1").line("set xlabel 't (months)'");
    s.panel(
        "Vacancies: data and Fourier fit",
        "vacancies",
        &[
            "'fit_values.csv' using 1:2 with points pt 7 ps 0.5 title 'data'".into(),
            "'fit_values.csv' using 1:3 with lines lw 2 title 'fit'".into(),
        ],
    );
    s.panel(
        "Residuals",
        "data - fit",
        &["'fit_values.csv' using 1:4 with impulses title 'residual'".into()],
    );
    s.finish()
}

/// Six panels: states, controls, control cost and unemployment rate.
pub fn ocp(meta: &Metadata, weights: Weights, max_rate: f64) -> String {
    let mut s = Script::new(meta, "ocp", 1200, 1100);
    s.line("set multiplot layout 3,2")
        .line("set xlabel 't (months)'")
        .line("set key off");
    s.panel("U", "persons", &["'states.csv' using 1:2 with lines lw 2".into()]);
    s.panel("E", "persons", &["'states.csv' using 1:3 with lines lw 2".into()]);
    s.panel(
        "u1 (internships)",
        "persons / month",
        &["'ctrl.csv' using 1:2 with steps lw 2".into()],
    );
    s.panel(
        "u2 (incentives)",
        "fraction",
        &["'ctrl.csv' using 1:3 with steps lw 2".into()],
    );
    s.panel(
        "Control cost B u1 + C u2",
        "cost / month",
        &[format!(
            "'ctrl.csv' using 1:({}*$2 + {}*$3) with steps lw 2",
            num(weights.b),
            num(weights.c)
        )],
    );
    s.panel(
        "Unemployment rate",
        "U / (U + E)",
        &[
            "'states.csv' using 1:($2/($2+$3)) with lines lw 2".into(),
            format!("{} with lines dt 2 lc 'red'", num(max_rate)),
        ],
    );
    s.finish()
}

/// Observed rate against the uncontrolled and (optionally) optimally
/// controlled model rates.
pub fn compare(meta: &Metadata, with_optimal: bool) -> String {
    let mut s = Script::new(meta, "compare", 1000, 500);
    s.line("set xlabel 't (months)'");
    let mut plots = vec![
        "'compare.csv' using 1:2 with lines dt 2 lw 2 title 'data'".to_string(),
        "'compare.csv' using 1:3 with lines lw 2 title 'model, no control'".to_string(),
    ];
    if with_optimal {
        plots.push("'compare.csv' using 1:4 with lines lw 2 title 'model, optimal control'".into());
    }
    s.panel("Unemployment rate: data versus simulation", "U / (U + E)", &plots);
    s.finish()
}

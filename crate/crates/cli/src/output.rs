//! Renderings of computed invariants.

use clap::ValueEnum;
use lp2dt::engine::DTRecord;
use lp2dt::qseries::rational_to_string;
use lp2dt::QSeries;
use num_traits::ToPrimitive;
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Sum of the known terms at `q = e^{-2 pi}`, i.e. `tau = i`.
pub fn value_at_i(series: &QSeries) -> f64 {
    let q = (-2.0 * std::f64::consts::PI).exp();
    series
        .iter()
        .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * q.powf(*e.numer() as f64 / *e.denom() as f64))
        .sum()
}

pub fn render_record(rec: &DTRecord, series: Option<&QSeries>, at_i: bool, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<_> = rec
                .values
                .iter()
                .map(|(d, v)| json!([d, rational_to_string(v)]))
                .collect();
            let mut out = json!({
                "r": rec.r,
                "l": rec.l,
                "order": rec.order,
                "rows": rows,
            });
            if let Some(s) = series {
                out["series"] = serde_json::to_value(s.to_record()).expect("series record serializes");
                if at_i {
                    out["value_at_tau_i"] = json!(value_at_i(s));
                }
            }
            let mut text = serde_json::to_string_pretty(&out).expect("json value serializes");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("r,l,delta,dt\n");
            for (d, v) in &rec.values {
                text.push_str(&format!("{},{},{},{}\n", rec.r, rec.l, d, v));
            }
            text
        }
        Format::Text => {
            let mut text = format!("DT({}, {}, D) for D <= {}\n", rec.r, rec.l, rec.order);
            for (d, v) in &rec.values {
                text.push_str(&format!("{d:>6}  {v}\n"));
            }
            if let Some(s) = series {
                text.push_str(&format!("series: {s}\n"));
                if at_i {
                    text.push_str(&format!("value at tau = i: {:.12e}\n", value_at_i(s)));
                }
            }
            text
        }
    }
}

pub fn render_series(series: &QSeries, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&series.to_record()).expect("series record serializes");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut text = String::from("exponent,coefficient\n");
            for (e, c) in series.iter() {
                text.push_str(&format!("{e},{c}\n"));
            }
            text
        }
        Format::Text => format!("{series}\n"),
    }
}

use std::io::Write;

use ehrenfest::{ModelParams, Rational, SetDescriptor, SimMode, State};
use serde::Serialize;

use crate::args::{CaseArgs, Format};

/// A rational with its nearest double alongside.
#[derive(Clone, Debug, Serialize)]
pub struct Quantity {
    pub exact: String,
    pub approx: f64,
}

impl From<&Rational> for Quantity {
    fn from(r: &Rational) -> Self {
        Quantity { exact: r.to_string(), approx: r.to_f64() }
    }
}

/// The fully resolved request, echoed into every report.
#[derive(Debug, Serialize)]
pub struct RunRequest {
    pub subcommand: &'static str,
    #[serde(rename = "N")]
    pub urns: u32,
    #[serde(rename = "M")]
    pub balls: u32,
    pub start: Option<State>,
    pub set: Option<String>,
    pub lambda: Vec<f64>,
    pub u: Vec<String>,
    pub order: usize,
    pub replicas: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub digits: u32,
    pub cap: String,
    pub format: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<(Option<u32>, Option<u32>)>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub corrupt_engine: bool,
}

impl RunRequest {
    pub fn new(subcommand: &'static str, a: &CaseArgs) -> Self {
        RunRequest {
            subcommand,
            urns: a.urns,
            balls: a.balls,
            start: a.start.clone(),
            set: a.set.as_ref().map(SetDescriptor::to_string),
            lambda: a.lambda.clone(),
            u: a.u.iter().map(Rational::to_string).collect(),
            order: a.order,
            replicas: a.replicas,
            seed: a.seed,
            mode: a.mode,
            digits: a.digits,
            cap: a.cap.to_string(),
            format: match a.format {
                Format::Json => "json",
                Format::Csv => "csv",
            },
            levels: None,
            corrupt_engine: a.corrupt_engine,
        }
    }
}

/// One flattened line of output; also the unit of a verdict.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Row {
    pub case: String,
    pub quantity: String,
    pub exact: Option<String>,
    pub oracle: Option<String>,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Row {
    pub fn new(case: &str, quantity: impl Into<String>) -> Self {
        Row { case: case.to_string(), quantity: quantity.into(), ..Row::default() }
    }

    pub fn judge(mut self, pass: bool, detail: Option<String>) -> Self {
        self.verdict = Some(if pass { "pass" } else { "fail" }.to_string());
        self.detail = if pass { None } else { detail };
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict.as_deref() == Some("fail")
    }
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub request: RunRequest,
    pub results: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<Row>>,
    pub timing: Option<Timing>,
}

/// Rendered output plus what the CSV view needs.
pub struct Outcome {
    pub results: serde_json::Value,
    pub rows: Vec<Row>,
    pub judged: bool,
}

impl Outcome {
    pub fn any_failed(&self) -> bool {
        self.judged && self.rows.iter().any(Row::failed)
    }
}

pub fn case_label(params: &ModelParams, start: Option<&State>, set: Option<&SetDescriptor>) -> String {
    let mut out = format!("N={} M={}", params.urns(), params.balls());
    if let Some(x) = start {
        out.push_str(&format!(" x={x}"));
    }
    if let Some(d) = set {
        out.push_str(&format!(" A={d}"));
    }
    out
}

pub fn write_json(report: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)
}

pub fn write_csv(rows: &[Row], out: &mut dyn Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "quantity", "exact", "oracle", "mc_mean", "mc_stderr", "verdict"])?;
    let opt = |v: &Option<String>| v.clone().unwrap_or_default();
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.case.clone(),
            r.quantity.clone(),
            opt(&r.exact),
            opt(&r.oracle),
            num(r.mc_mean),
            num(r.mc_stderr),
            opt(&r.verdict),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! Experiment plumbing behind the `anarchy` binary: configuration, report
//! rows, instance files and per-domain dispatch.

mod handlers;
mod table;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::auctions::{MPHkValuation, SymmetricValuation};
use crate::error::{Error, Result};
use crate::mechanism::Domain;
use crate::packing::InstanceKind;
use crate::rational::{self, RatStr, Rational};

pub use table::{paper_table, TableRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Gen,
    Solve,
    Round,
    CheckSmoothness,
    CheckLemma,
    Counterexample,
    Dynamics,
    PaperTable,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Gen => "gen",
            Action::Solve => "solve",
            Action::Round => "round",
            Action::CheckSmoothness => "check-smoothness",
            Action::CheckLemma => "check-lemma",
            Action::Counterexample => "counterexample",
            Action::Dynamics => "dynamics",
            Action::PaperTable => "paper-table",
        }
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown action {s:?}")))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CLI invocation. Unset parameters fall back to per-action defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub action: Action,
    pub instance: Option<PathBuf>,
    pub seed: u64,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub eps: Option<RatStr>,
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub grid: Option<usize>,
    /// Random instances per lemma sweep.
    pub count: Option<usize>,
    pub kind: Option<InstanceKind>,
    /// Symmetric (cardinality) valuations for auctions.
    pub symmetric: bool,
}

impl ExperimentConfig {
    pub fn new(domain: Domain, action: Action) -> Self {
        Self {
            domain,
            action,
            instance: None,
            seed: 0,
            n: None,
            d: None,
            k: None,
            m: None,
            eps: None,
            rounds: None,
            eta: None,
            grid: None,
            count: None,
            kind: None,
            symmetric: false,
        }
    }

    /// Non-default parameters as `key=value;...`.
    pub fn params(&self) -> String {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{k}={v}"));
            }
        };
        put("n", self.n.map(|x| x.to_string()));
        put("d", self.d.map(|x| x.to_string()));
        put("k", self.k.map(|x| x.to_string()));
        put("m", self.m.map(|x| x.to_string()));
        put("eps", self.eps.as_ref().map(|x| x.to_string()));
        put("rounds", self.rounds.map(|x| x.to_string()));
        put("eta", self.eta.map(|x| x.to_string()));
        put("grid", self.grid.map(|x| x.to_string()));
        put("count", self.count.map(|x| x.to_string()));
        put("kind", self.kind.map(|x| serde_json::to_value(x).expect("enum").as_str().unwrap_or_default().to_string()));
        put("symmetric", self.symmetric.then(|| "true".to_string()));
        out.join(";")
    }

    /// SHA-256 over the configuration and the instance file bytes, hex.
    pub fn hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self)?);
        if let Some(p) = &self.instance {
            h.update(std::fs::read(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?);
        }
        Ok(hex::encode(h.finalize()))
    }

    pub(crate) fn eps(&self) -> Rational {
        self.eps.as_ref().map_or_else(rational::half, |e| e.0.clone())
    }
}

/// One self-describing result line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub domain: String,
    pub action: String,
    pub seed: u64,
    pub config_hash: String,
    pub params: String,
    pub instance: String,
    pub subject: String,
    pub metric: String,
    /// `p/q`, an integer, or a symbolic expression.
    pub value: String,
    pub decimal: String,
    /// `holds`, `violated`, or empty for plain measurements.
    pub verdict: String,
    pub witness: String,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Generated instance for `gen`.
    pub artifact: Option<serde_json::Value>,
}

impl Report {
    pub fn violated(&self) -> bool {
        self.rows.iter().any(|r| r.verdict.starts_with("violated"))
    }

    pub fn find(&self, subject: &str, metric: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.subject == subject && r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Always).from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.rows)?;
        Ok(())
    }
}

pub fn read_csv(text: &str) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Auction instance file: `m` items and either MPH-k or symmetric valuations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionInstance {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub valuations: Vec<MPHkValuation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetric: Vec<SymmetricValuation>,
}

impl AuctionInstance {
    pub fn validate(&self) -> Result<()> {
        if self.valuations.is_empty() == self.symmetric.is_empty() {
            return Err(Error::Structural("auction instance needs exactly one of valuations, symmetric".into()));
        }
        if self.valuations.iter().any(|v| v.span() > self.m) || self.symmetric.iter().any(|v| v.m() != self.m) {
            return Err(Error::Structural(format!("valuations must range over m = {} items", self.m)));
        }
        Ok(())
    }

    /// Largest hyperedge size over all valuations (at least 1).
    pub fn k(&self) -> usize {
        self.valuations.iter().map(|v| v.k).max().unwrap_or(1).max(1)
    }
}

/// Reads a JSON instance, reporting the path, line and column on failure.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Collects rows for one run.
pub(crate) struct Sink<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    start: Instant,
    pub rows: Vec<ReportRow>,
}

impl<'a> Sink<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        Ok(Self {
            cfg,
            hash: cfg.hash()?,
            start: Instant::now(),
            rows: Vec::new(),
        })
    }

    fn push(&mut self, subject: &str, metric: &str, value: String, decimal: String, verdict: &str, witness: String) {
        self.rows.push(ReportRow {
            domain: self.cfg.domain.as_str().to_string(),
            action: self.cfg.action.as_str().to_string(),
            seed: self.cfg.seed,
            config_hash: self.hash.clone(),
            params: self.cfg.params(),
            instance: self.cfg.instance.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            subject: subject.to_string(),
            metric: metric.to_string(),
            value,
            decimal,
            verdict: verdict.to_string(),
            witness,
            wall_ms: self.start.elapsed().as_millis() as u64,
        });
    }

    pub fn rat(&mut self, subject: &str, metric: &str, r: &Rational) {
        self.push(subject, metric, rational::format(r), rational::decimal(r), "", String::new());
    }

    pub fn count(&mut self, subject: &str, metric: &str, c: usize) {
        self.push(subject, metric, c.to_string(), c.to_string(), "", String::new());
    }

    pub fn float(&mut self, subject: &str, metric: &str, x: f64) {
        self.push(subject, metric, String::new(), format!("{x:.6}"), "", String::new());
    }

    pub fn text(&mut self, subject: &str, metric: &str, t: String) {
        self.push(subject, metric, t, String::new(), "", String::new());
    }

    pub fn verdict(&mut self, subject: &str, metric: &str, value: Option<&Rational>, holds: bool, witness: String) {
        let (v, d) = value.map_or((String::new(), String::new()), |r| (rational::format(r), rational::decimal(r)));
        self.push(subject, metric, v, d, if holds { "holds" } else { "violated" }, witness);
    }
}

/// Dispatches one configuration to the domain modules.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut sink = Sink::new(cfg)?;
    let artifact = match cfg.action {
        Action::PaperTable => {
            table::emit(&mut sink)?;
            None
        }
        _ => match cfg.domain {
            Domain::Packing => handlers::packing(cfg, &mut sink)?,
            Domain::Flow => handlers::flow(cfg, &mut sink)?,
            Domain::Maxtsp => handlers::maxtsp(cfg, &mut sink)?,
            Domain::Auctions => handlers::auctions(cfg, &mut sink)?,
        },
    };
    Ok(Report { rows: sink.rows, artifact })
}

//! Comparison tables: SA-CCR, RSA-CCR under both discounting choices and the
//! Monte Carlo oracle, side by side with percentage differences.

mod scenarios;

pub use scenarios::{
    builtin_scenario, builtin_scenarios, portfolio_rows, Scenario, ScenarioRow, SCENARIO_NAMES,
};

use serde::{Serialize, Serializer};

use crate::curves::MarketData;
use crate::error::{Error, Result};
use crate::gmm::{oracle_addons, ExposureProfile, McSettings};
use crate::rsaccr::{portfolio_rsaccr_addon, DecompositionSettings, Discounting};
use crate::saccr::{portfolio_addon, SupervisoryConfig};
use crate::trades::Trade;

/// Oracle values below this are treated as zero when forming ratios.
pub const ORACLE_ZERO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Methods {
    pub saccr: bool,
    pub rsaccr: bool,
    pub mc: bool,
}

impl Methods {
    pub fn all() -> Self {
        Self {
            saccr: true,
            rsaccr: true,
            mc: true,
        }
    }
}

impl std::str::FromStr for Methods {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut m = Methods::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "saccr" => m.saccr = true,
                "rsaccr" => m.rsaccr = true,
                "mc" => m.mc = true,
                _ => {
                    return Err(Error::Config(format!(
                        "unknown method '{part}' (saccr|rsaccr|mc)"
                    )))
                }
            }
        }
        if m == Methods::default() {
            return Err(Error::Config("at least one method must be selected".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DiscountingChoice {
    #[default]
    Market,
    None,
    Both,
}

impl DiscountingChoice {
    fn wants(self, d: Discounting) -> bool {
        matches!(
            (self, d),
            (DiscountingChoice::Both, _)
                | (DiscountingChoice::Market, Discounting::Market)
                | (DiscountingChoice::None, Discounting::None)
        )
    }
}

impl std::str::FromStr for DiscountingChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "market" => Ok(Self::Market),
            "none" => Ok(Self::None),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!(
                "unknown discounting '{s}' (market|none|both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSettings {
    pub methods: Methods,
    pub discounting: DiscountingChoice,
    /// Decomposition options; its `discounting` field is overridden per column.
    pub decomposition: DecompositionSettings,
    pub supervisory: SupervisoryConfig,
    pub mc: McSettings,
}

impl Default for ReportSettings {
    fn default() -> Self {
        let supervisory = SupervisoryConfig::default();
        Self {
            methods: Methods::all(),
            discounting: DiscountingChoice::Both,
            decomposition: DecompositionSettings::default(),
            mc: McSettings::supervisory(&supervisory),
            supervisory,
        }
    }
}

/// Relative difference of a method against the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PctDiff {
    /// method / oracle − 1.
    Finite(f64),
    /// Oracle is zero but the method is not.
    Infinite,
}

impl PctDiff {
    pub fn new(method: f64, oracle: f64) -> Self {
        if oracle > ORACLE_ZERO {
            PctDiff::Finite(method / oracle - 1.0)
        } else if method > ORACLE_ZERO {
            PctDiff::Infinite
        } else {
            PctDiff::Finite(0.0)
        }
    }

    pub fn fraction(self) -> f64 {
        match self {
            PctDiff::Finite(x) => x,
            PctDiff::Infinite => f64::INFINITY,
        }
    }

    fn pretty(self) -> String {
        match self {
            PctDiff::Finite(x) => format!("{:.0}%", 100.0 * x),
            PctDiff::Infinite => "inf%".to_string(),
        }
    }

    fn full(self) -> String {
        match self {
            PctDiff::Finite(x) => format!("{}", 100.0 * x),
            PctDiff::Infinite => "inf".to_string(),
        }
    }
}

impl Serialize for PctDiff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PctDiff::Finite(x) => s.serialize_f64(100.0 * x),
            PctDiff::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    /// Average of the pay and receive add-ons.
    pub value: f64,
    pub stderr: f64,
    /// E[(V(t) − V(0))⁺] averaged over the year, for the book as booked.
    pub pay: f64,
    /// The same for the mirrored book.
    pub receive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub saccr: Option<f64>,
    pub rsaccr_nodisc: Option<f64>,
    pub rsaccr_market: Option<f64>,
    pub oracle: Option<OracleValue>,
}

impl ComparisonRow {
    fn diff(&self, method: Option<f64>) -> Option<PctDiff> {
        Some(PctDiff::new(method?, self.oracle.as_ref()?.value))
    }

    pub fn saccr_diff(&self) -> Option<PctDiff> {
        self.diff(self.saccr)
    }

    pub fn rsaccr_nodisc_diff(&self) -> Option<PctDiff> {
        self.diff(self.rsaccr_nodisc)
    }

    pub fn rsaccr_market_diff(&self) -> Option<PctDiff> {
        self.diff(self.rsaccr_market)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub rows: Vec<ComparisonRow>,
    pub mc_paths: Option<usize>,
    pub seed: Option<u64>,
}

/// Evaluate every selected method on each row. Also returns the oracle
/// exposure profiles when the Monte Carlo method ran.
pub fn compute_report(
    name: &str,
    rows: &[ScenarioRow],
    market: &MarketData,
    settings: &ReportSettings,
) -> Result<(Report, Vec<ExposureProfile>)> {
    let cfg = &settings.supervisory;
    cfg.validate()?;
    let rsaccr = |trades: &[Trade], d: Discounting| -> Result<Option<f64>> {
        if !settings.methods.rsaccr || !settings.discounting.wants(d) {
            return Ok(None);
        }
        let ds = DecompositionSettings {
            discounting: d,
            ..settings.decomposition.clone()
        };
        Ok(Some(
            portfolio_rsaccr_addon(trades, market, &ds, cfg)?.total,
        ))
    };

    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(ComparisonRow {
            label: r.label.clone(),
            saccr: if settings.methods.saccr {
                Some(portfolio_addon(&r.trades, cfg)?.0)
            } else {
                None
            },
            rsaccr_nodisc: rsaccr(&r.trades, Discounting::None)?,
            rsaccr_market: rsaccr(&r.trades, Discounting::Market)?,
            oracle: None,
        });
    }

    let mut profiles = Vec::new();
    if settings.methods.mc && !rows.is_empty() {
        let books: Vec<Vec<Trade>> = rows.iter().map(|r| r.trades.clone()).collect();
        profiles = oracle_addons(&books, market, &settings.mc)?;
        for (row, p) in out.iter_mut().zip(&profiles) {
            row.oracle = Some(OracleValue {
                value: p.addon.value,
                stderr: p.addon.stderr,
                pay: p.addon_pay.value,
                receive: p.addon_receive.value,
            });
        }
    }
    let mc = settings.methods.mc;
    Ok((
        Report {
            name: name.to_string(),
            rows: out,
            mc_paths: mc.then_some(settings.mc.paths),
            seed: mc.then_some(settings.mc.seed),
        },
        profiles,
    ))
}

fn grouped(x: f64) -> String {
    let r = x.round();
    let digits = format!("{:.0}", r.abs());
    let mut s = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            s.push(',');
        }
        s.push(c);
    }
    if r < 0.0 {
        format!("-{s}")
    } else {
        s
    }
}

impl Report {
    fn columns(&self) -> [bool; 4] {
        let any = |f: fn(&ComparisonRow) -> bool| self.rows.iter().any(f);
        [
            any(|r| r.saccr.is_some()),
            any(|r| r.rsaccr_nodisc.is_some()),
            any(|r| r.rsaccr_market.is_some()),
            any(|r| r.oracle.is_some()),
        ]
    }

    /// Whole currency units and whole percents.
    pub fn to_pretty(&self) -> String {
        let [sa, nd, mk, mc] = self.columns();
        let mut header = vec!["Instrument".to_string()];
        let names = [
            (sa, "SA-CCR"),
            (nd, "RSA-CCR no disc"),
            (mk, "RSA-CCR market"),
        ];
        header.extend(names.iter().filter(|c| c.0).map(|c| c.1.to_string()));
        if mc {
            header.push("Oracle".into());
            header.push("stderr".into());
            header.push("EEPE as booked".into());
            header.extend(names.iter().filter(|c| c.0).map(|c| format!("{} %", c.1)));
        }
        let mut table = vec![header];
        for r in &self.rows {
            let mut line = vec![r.label.clone()];
            let vals = [(sa, r.saccr), (nd, r.rsaccr_nodisc), (mk, r.rsaccr_market)];
            for (on, v) in vals {
                if on {
                    line.push(v.map_or("-".into(), grouped));
                }
            }
            if mc {
                line.push(r.oracle.as_ref().map_or("-".into(), |o| grouped(o.value)));
                line.push(r.oracle.as_ref().map_or("-".into(), |o| grouped(o.stderr)));
                line.push(r.oracle.as_ref().map_or("-".into(), |o| grouped(o.pay)));
                let diffs = [
                    (sa, r.saccr_diff()),
                    (nd, r.rsaccr_nodisc_diff()),
                    (mk, r.rsaccr_market_diff()),
                ];
                for (on, d) in diffs {
                    if on {
                        line.push(d.map_or("-".into(), PctDiff::pretty));
                    }
                }
            }
            table.push(line);
        }
        let ncol = table[0].len();
        let widths: Vec<usize> = (0..ncol)
            .map(|c| {
                table
                    .iter()
                    .map(|l| l[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut s = format!("{}\n", self.name);
        for line in &table {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if c == 0 {
                        format!("{v:<w$}", w = widths[c])
                    } else {
                        format!("{v:>w$}", w = widths[c])
                    }
                })
                .collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "label",
            "saccr",
            "rsaccr_nodisc",
            "rsaccr_market",
            "oracle",
            "oracle_stderr",
            "oracle_pay",
            "oracle_receive",
            "saccr_pct",
            "rsaccr_nodisc_pct",
            "rsaccr_market_pct",
        ])?;
        let num = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let pct = |d: Option<PctDiff>| d.map_or(String::new(), PctDiff::full);
        for r in &self.rows {
            let o = r.oracle.as_ref();
            w.write_record([
                r.label.clone(),
                num(r.saccr),
                num(r.rsaccr_nodisc),
                num(r.rsaccr_market),
                num(o.map(|o| o.value)),
                num(o.map(|o| o.stderr)),
                num(o.map(|o| o.pay)),
                num(o.map(|o| o.receive)),
                pct(r.saccr_diff()),
                pct(r.rsaccr_nodisc_diff()),
                pct(r.rsaccr_market_diff()),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            #[serde(flatten)]
            row: &'a ComparisonRow,
            saccr_pct: Option<PctDiff>,
            rsaccr_nodisc_pct: Option<PctDiff>,
            rsaccr_market_pct: Option<PctDiff>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            name: &'a str,
            mc_paths: Option<usize>,
            seed: Option<u64>,
            rows: Vec<Row<'a>>,
        }
        let doc = Doc {
            name: &self.name,
            mc_paths: self.mc_paths,
            seed: self.seed,
            rows: self
                .rows
                .iter()
                .map(|row| Row {
                    row,
                    saccr_pct: row.saccr_diff(),
                    rsaccr_nodisc_pct: row.rsaccr_nodisc_diff(),
                    rsaccr_market_pct: row.rsaccr_market_diff(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

//! Builtin comparison portfolios: moneyness ladders, economically equivalent
//! re-confirmations, amortising, zero-coupon and forward-starting swaps,
//! and the zero add-on package.

use serde::Serialize;

use crate::curves::MarketData;
use crate::error::{Error, Result};
use crate::trades::{
    amortising_swap, make_fra_strip, make_zero_addon_package, mirror, par_rate, split_swap,
    vanilla_swap, zero_coupon_swap, Direction, Trade,
};

pub const SCENARIO_NAMES: [&str; 8] = [
    "table2",
    "table3",
    "moneyness",
    "replications",
    "amortising",
    "zero_coupon",
    "forward_start",
    "zero_addon",
];

const NOTIONAL: f64 = 100e6;
const FREQ: f64 = 0.25;
const STRIKES_BP: [f64; 5] = [500.0, 100.0, 0.0, -100.0, -500.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub label: String,
    pub trades: Vec<Trade>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub rows: Vec<ScenarioRow>,
}

fn row(label: impl Into<String>, trades: Vec<Trade>) -> ScenarioRow {
    ScenarioRow {
        label: label.into(),
        trades,
    }
}

fn strike_label(bp: f64) -> String {
    match bp {
        0.0 => "ATM".to_string(),
        b if b > 0.0 => format!("ATM+{b}bps"),
        b => format!("ATM{b}bps"),
    }
}

fn atm_rate(start: f64, end: f64, market: &MarketData) -> Result<f64> {
    par_rate(
        &vanilla_swap("atm", Direction::Pay, NOTIONAL, 0.0, start, end, FREQ),
        market,
    )
}

fn atm_swap(market: &MarketData) -> Result<Trade> {
    Ok(vanilla_swap(
        "atm-10y",
        Direction::Pay,
        NOTIONAL,
        atm_rate(0.0, 10.0, market)?,
        0.0,
        10.0,
        FREQ,
    ))
}

fn replication_rows(market: &MarketData, with_hedged: bool) -> Result<Vec<ScenarioRow>> {
    let atm = atm_swap(market)?;
    let strip = make_fra_strip(&atm)?;
    let (near, far) = split_swap(&atm, 3.0)?;
    let mut rows = vec![
        row("ATM Swap", vec![atm.clone()]),
        row("FRA Replication", strip.clone()),
    ];
    if with_hedged {
        rows.push(row("ATM - FRAs", hedged(&atm, &strip)));
    }
    rows.push(row("split at 3Y", vec![near, far]));
    Ok(rows)
}

fn hedged(atm: &Trade, strip: &[Trade]) -> Vec<Trade> {
    std::iter::once(atm.clone())
        .chain(strip.iter().map(mirror))
        .collect()
}

fn moneyness(market: &MarketData) -> Result<Vec<ScenarioRow>> {
    let r = atm_rate(0.0, 10.0, market)?;
    let mut rows = Vec::new();
    for bp in STRIKES_BP {
        for (dir, name) in [(Direction::Pay, "pay"), (Direction::Receive, "receive")] {
            let id = format!("{}-{name}", strike_label(bp).to_lowercase());
            rows.push(row(
                format!("{} {name}", strike_label(bp)),
                vec![vanilla_swap(
                    &id,
                    dir,
                    NOTIONAL,
                    r + bp * 1e-4,
                    0.0,
                    10.0,
                    FREQ,
                )],
            ));
        }
    }
    Ok(rows)
}

fn amortising(market: &MarketData) -> Result<Vec<ScenarioRow>> {
    let schedule = [(0.0, 2.0 * NOTIONAL), (5.0, NOTIONAL)];
    let probe = amortising_swap("amort", Direction::Pay, &schedule, 0.0, 0.0, 10.0, FREQ);
    let r = par_rate(&probe, market)?;
    let amort = amortising_swap("amort", Direction::Pay, &schedule, r, 0.0, 10.0, FREQ);
    let swap = |id: &str, dir, n, s, e| vanilla_swap(id, dir, n, r, s, e, FREQ);
    Ok(vec![
        row("Amortising 10Y:5Y/200M;5Y/100M", vec![amort.clone()]),
        row("FRA replication", make_fra_strip(&amort)?),
        row(
            "5Y/200M and forward start 5Y5Y/100M",
            vec![
                swap("5y-200m", Direction::Pay, 2.0 * NOTIONAL, 0.0, 5.0),
                swap("5y5y-100m", Direction::Pay, NOTIONAL, 5.0, 10.0),
            ],
        ),
        row(
            "10Y/100M and 5Y/100M",
            vec![
                swap("10y-100m", Direction::Pay, NOTIONAL, 0.0, 10.0),
                swap("5y-100m", Direction::Pay, NOTIONAL, 0.0, 5.0),
            ],
        ),
        row(
            "Amortising minus 10Y/150M",
            vec![
                amort,
                swap("10y-150m", Direction::Receive, 1.5 * NOTIONAL, 0.0, 10.0),
            ],
        ),
    ])
}

fn zero_coupon(market: &MarketData) -> Result<Vec<ScenarioRow>> {
    let probe = zero_coupon_swap("zc", Direction::Pay, NOTIONAL, 0.0, 0.0, 10.0, FREQ);
    let r = par_rate(&probe, market)?;
    Ok(STRIKES_BP
        .iter()
        .map(|&bp| {
            let label = format!("Zero Coupon {} 10y", strike_label(bp));
            let id = format!("zc-{}", strike_label(bp).to_lowercase());
            row(
                label,
                vec![zero_coupon_swap(
                    &id,
                    Direction::Pay,
                    NOTIONAL,
                    r + bp * 1e-4,
                    0.0,
                    10.0,
                    FREQ,
                )],
            )
        })
        .collect())
}

fn forward_start(market: &MarketData) -> Result<Vec<ScenarioRow>> {
    let r = atm_rate(1.0, 11.0, market)?;
    Ok(STRIKES_BP
        .iter()
        .map(|&bp| {
            let suffix = if bp == 0.0 {
                String::new()
            } else {
                format!(" {:+}bps", bp)
            };
            let id = format!("fwd-1y10y{}", suffix.trim().to_lowercase());
            row(
                format!("Fwd Start ATM 1y-10y{suffix}"),
                vec![vanilla_swap(
                    &id,
                    Direction::Pay,
                    NOTIONAL,
                    r + bp * 1e-4,
                    1.0,
                    11.0,
                    FREQ,
                )],
            )
        })
        .collect())
}

fn zero_addon(market: &MarketData, maturity: f64) -> Result<Vec<ScenarioRow>> {
    let r = atm_rate(0.0, maturity, market)?;
    Ok(vec![
        row(
            format!("Zero add-on package T={maturity}"),
            make_zero_addon_package(NOTIONAL, r, maturity)?,
        ),
        row(
            format!("Receiver swap 0-{maturity}Y"),
            vec![vanilla_swap(
                "residual",
                Direction::Receive,
                NOTIONAL,
                r,
                0.0,
                maturity,
                FREQ,
            )],
        ),
    ])
}

/// Builtin scenario by name; `zero_addon:<T>` selects the package maturity (default 6).
pub fn builtin_scenario(name: &str, market: &MarketData) -> Result<Scenario> {
    let (base, arg) = name
        .split_once(':')
        .map_or((name, None), |(a, b)| (a, Some(b)));
    let rows = match base {
        "table2" => replication_rows(market, false)?,
        "table3" => {
            let atm = atm_swap(market)?;
            let strip = make_fra_strip(&atm)?;
            vec![row("ATM - FRAs", hedged(&atm, &strip))]
        }
        "moneyness" => moneyness(market)?,
        "replications" => replication_rows(market, true)?,
        "amortising" => amortising(market)?,
        "zero_coupon" => zero_coupon(market)?,
        "forward_start" => forward_start(market)?,
        "zero_addon" => {
            let t = match arg {
                None => 6.0,
                Some(s) => s
                    .trim_start_matches("T=")
                    .parse()
                    .map_err(|_| Error::Config(format!("bad package maturity '{s}'")))?,
            };
            zero_addon(market, t)?
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown scenario '{name}', expected one of {}",
                SCENARIO_NAMES.join(", ")
            )))
        }
    };
    if arg.is_some() && base != "zero_addon" {
        return Err(Error::Config(format!(
            "scenario '{base}' takes no argument"
        )));
    }
    Ok(Scenario {
        name: name.to_string(),
        rows,
    })
}

pub fn builtin_scenarios(market: &MarketData) -> Result<Vec<Scenario>> {
    SCENARIO_NAMES
        .iter()
        .map(|n| builtin_scenario(n, market))
        .collect()
}

/// One row per trade plus the whole netting set.
pub fn portfolio_rows(trades: &[Trade]) -> Vec<ScenarioRow> {
    let mut rows: Vec<ScenarioRow> = trades
        .iter()
        .map(|t| row(t.id.clone(), vec![t.clone()]))
        .collect();
    rows.push(row("Netting set", trades.to_vec()));
    rows
}

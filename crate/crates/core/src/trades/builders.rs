//! Constructors for the standard trades and for economically equivalent
//! re-confirmations of them.

use super::{Direction, Leg, LegKind, Trade};
use crate::curves::{snap_time, TIME_EPS};
use crate::error::{domain, Error, Result};
use crate::saccr::MaturityBucket;

/// Mean reversion of the supervisory duration, used to size the zero add-on package.
const SUPERVISORY_A: f64 = 0.05;

fn two_leg_trade(id: &str, fixed: Leg, other: Leg) -> Trade {
    Trade {
        id: id.to_string(),
        currency: "USD".to_string(),
        legs: vec![fixed, other],
        margined: false,
        mpor: None,
    }
}

/// Fixed-vs-floating swap with matching fixed and floating frequencies.
/// `fixed_direction` = `Pay` gives a payer swap.
pub fn vanilla_swap(
    id: &str,
    fixed_direction: Direction,
    notional: f64,
    rate: f64,
    start: f64,
    end: f64,
    frequency: f64,
) -> Trade {
    amortising_swap(
        id,
        fixed_direction,
        &[(start, notional)],
        rate,
        start,
        end,
        frequency,
    )
}

/// Swap with a piecewise-constant notional schedule on both legs.
pub fn amortising_swap(
    id: &str,
    fixed_direction: Direction,
    notional: &[(f64, f64)],
    rate: f64,
    start: f64,
    end: f64,
    frequency: f64,
) -> Trade {
    let fixed = Leg {
        direction: fixed_direction,
        kind: LegKind::Fixed { rate },
        notional: notional.to_vec(),
        frequency,
        start,
        end,
    };
    let float = Leg {
        direction: fixed_direction.flip(),
        kind: LegKind::Floating { tenor: frequency },
        ..fixed.clone()
    };
    two_leg_trade(id, fixed, float)
}

/// Zero-coupon swap: N((1+R)^(E−S) − 1) against N(Π(1+δL) − 1), both paid at E.
pub fn zero_coupon_swap(
    id: &str,
    fixed_direction: Direction,
    notional: f64,
    rate: f64,
    start: f64,
    end: f64,
    tenor: f64,
) -> Trade {
    let fixed = Leg {
        direction: fixed_direction,
        kind: LegKind::ZeroCouponFixed { rate },
        notional: vec![(start, notional)],
        frequency: end - start,
        start,
        end,
    };
    let float = Leg {
        direction: fixed_direction.flip(),
        kind: LegKind::Compound {
            tenor,
            accrued_factor: None,
        },
        ..fixed.clone()
    };
    two_leg_trade(id, fixed, float)
}

/// Same trade with every leg direction reversed.
pub fn mirror(trade: &Trade) -> Trade {
    Trade {
        id: format!("{}-mirror", trade.id),
        legs: trade
            .legs
            .iter()
            .map(|l| Leg {
                direction: l.direction.flip(),
                ..l.clone()
            })
            .collect(),
        ..trade.clone()
    }
}

fn vanilla_legs(swap: &Trade) -> Result<(&Leg, &Leg)> {
    let (fixed, float) = match swap.legs.as_slice() {
        [a, b]
            if matches!(a.kind, LegKind::Fixed { .. })
                && matches!(b.kind, LegKind::Floating { .. }) =>
        {
            (a, b)
        }
        [a, b]
            if matches!(b.kind, LegKind::Fixed { .. })
                && matches!(a.kind, LegKind::Floating { .. }) =>
        {
            (b, a)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{} is not a fixed-vs-floating swap",
                swap.id
            )))
        }
    };
    let aligned = (fixed.frequency - float.frequency).abs() < TIME_EPS
        && (fixed.start - float.start).abs() < TIME_EPS
        && (fixed.end - float.end).abs() < TIME_EPS;
    if !aligned {
        return Err(Error::Unsupported(format!(
            "{}: fixed and floating schedules must coincide",
            swap.id
        )));
    }
    Ok((fixed, float))
}

fn restrict(leg: &Leg, start: f64, end: f64) -> Leg {
    Leg {
        start,
        end,
        notional: vec![(start, leg.notional_at(start))]
            .into_iter()
            .chain(
                leg.notional
                    .iter()
                    .copied()
                    .filter(|&(from, _)| from > start + TIME_EPS && from < end - TIME_EPS),
            )
            .collect(),
        ..leg.clone()
    }
}

/// One single-period swap (FRA) per floating period, at the swap's fixed rate and period notional.
pub fn make_fra_strip(swap: &Trade) -> Result<Vec<Trade>> {
    let (fixed, float) = vanilla_legs(swap)?;
    let periods = float.periods()?;
    if periods.len() == 1 {
        return Ok(vec![swap.clone()]);
    }
    Ok(periods
        .iter()
        .enumerate()
        .map(|(i, &(s, e))| Trade {
            id: format!("{}-fra{:03}", swap.id, i + 1),
            legs: vec![
                Leg {
                    frequency: e - s,
                    ..restrict(fixed, s, e)
                },
                Leg {
                    frequency: e - s,
                    ..restrict(float, s, e)
                },
            ],
            ..swap.clone()
        })
        .collect())
}

/// Split a swap at a common period boundary into a spot part and a forward-starting part.
pub fn split_swap(swap: &Trade, at: f64) -> Result<(Trade, Trade)> {
    let at = snap_time(at);
    for leg in &swap.legs {
        if !leg.periods()?.iter().any(|&(_, e)| e == at) || at >= leg.end {
            return domain(format!(
                "{at} is not an interior period boundary of {}",
                swap.id
            ));
        }
    }
    let part = |suffix: &str, s: Option<f64>, e: Option<f64>| Trade {
        id: format!("{}-{suffix}", swap.id),
        legs: swap
            .legs
            .iter()
            .map(|l| restrict(l, s.unwrap_or(l.start), e.unwrap_or(l.end)))
            .collect(),
        ..swap.clone()
    };
    Ok((part("near", None, Some(at)), part("far", Some(at), None)))
}

/// Four swaps whose SA-CCR add-ons cancel while their net economics equal a
/// receiver swap of notional `notional` over `[0, maturity]`.
pub fn make_zero_addon_package(notional: f64, rate: f64, maturity: f64) -> Result<Vec<Trade>> {
    if !(maturity >= 1.0) {
        return domain(format!(
            "package maturity must be at least 1y, got {maturity}"
        ));
    }
    if MaturityBucket::of(maturity) != MaturityBucket::of(2.0 * maturity) {
        return domain(format!(
            "{maturity} and {} fall in different maturity buckets",
            2.0 * maturity
        ));
    }
    let growth = (SUPERVISORY_A * maturity).exp();
    let k = growth / (growth - 1.0);
    let t2 = 2.0 * maturity;
    let freq = 0.25;
    let trades = vec![
        amortising_swap(
            "pkg-1-amortising-receiver",
            Direction::Receive,
            &[(0.0, 3.0 * k * notional), (maturity, k * notional)],
            rate,
            0.0,
            t2,
            freq,
        ),
        vanilla_swap(
            "pkg-2-payer",
            Direction::Pay,
            2.0 * k * notional,
            rate,
            0.0,
            t2,
            freq,
        ),
        vanilla_swap(
            "pkg-3-forward-receiver",
            Direction::Receive,
            k * notional,
            rate,
            maturity,
            t2,
            freq,
        ),
        vanilla_swap(
            "pkg-4-payer",
            Direction::Pay,
            notional / (growth - 1.0),
            rate,
            0.0,
            maturity,
            freq,
        ),
    ];
    for t in &trades {
        t.validate()?;
    }
    Ok(trades)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::MarketData;
    use std::collections::BTreeMap;

    fn net_by_date(trades: &[Trade], md: &MarketData) -> BTreeMap<u64, f64> {
        let mut net = BTreeMap::new();
        for t in trades {
            for cf in t.cashflows(md).unwrap() {
                *net.entry(cf.pay_date.to_bits()).or_insert(0.0) += cf.signed_amount();
            }
        }
        net
    }

    #[test]
    fn fra_strip_of_ten_year_swap() {
        let swap = vanilla_swap("s", Direction::Pay, 100e6, 0.03, 0.0, 10.0, 0.25);
        let strip = make_fra_strip(&swap).unwrap();
        assert_eq!(strip.len(), 40);
        let md = MarketData::single_curve(crate::curves::sample_usd_curve());
        let a = net_by_date(&[swap], &md);
        let b = net_by_date(&strip, &md);
        assert_eq!(a.len(), b.len());
        for (k, v) in &a {
            assert!((v - b[k]).abs() < 1e-9, "date {}", f64::from_bits(*k));
        }
    }

    #[test]
    fn fra_strip_of_single_period_is_identity() {
        let swap = vanilla_swap("s", Direction::Pay, 100e6, 0.03, 1.0, 1.25, 0.25);
        assert_eq!(make_fra_strip(&swap).unwrap(), vec![swap]);
    }

    #[test]
    fn fra_strip_rejects_mismatched_frequencies() {
        let mut swap = vanilla_swap("s", Direction::Pay, 100e6, 0.03, 0.0, 2.0, 0.25);
        swap.legs[0].frequency = 0.5;
        assert!(matches!(make_fra_strip(&swap), Err(Error::Unsupported(_))));
    }

    #[test]
    fn split_preserves_cashflows() {
        let swap = vanilla_swap("s", Direction::Receive, 100e6, 0.03, 0.0, 10.0, 0.25);
        let (near, far) = split_swap(&swap, 3.0).unwrap();
        assert_eq!(near.maturity(), 3.0);
        assert_eq!(far.start(), 3.0);
        let md = MarketData::single_curve(crate::curves::sample_usd_curve());
        assert_eq!(
            net_by_date(std::slice::from_ref(&swap), &md),
            net_by_date(&[near, far], &md)
        );
        assert!(split_swap(&swap, 3.1).is_err());
        assert!(split_swap(&swap, 10.0).is_err());
    }

    #[test]
    fn zero_addon_package_nets_to_receiver_swap() {
        let md = MarketData::single_curve(crate::curves::sample_usd_curve());
        let pkg = make_zero_addon_package(100e6, 0.03, 6.0).unwrap();
        assert_eq!(pkg.len(), 4);
        let residual = vanilla_swap("r", Direction::Receive, 100e6, 0.03, 0.0, 6.0, 0.25);
        let net = net_by_date(&pkg, &md);
        let want = net_by_date(&[residual], &md);
        for (k, v) in &net {
            let t = f64::from_bits(*k);
            let expected = want.get(k).copied().unwrap_or(0.0);
            assert!((v - expected).abs() < 1e-6, "t = {t}: {v} vs {expected}");
        }
        assert!(make_zero_addon_package(100e6, 0.03, 3.0).is_err());
        assert!(make_zero_addon_package(100e6, 0.03, 0.5).is_err());
    }

    #[test]
    fn mirror_flips_every_leg() {
        let swap = vanilla_swap("s", Direction::Pay, 1.0, 0.01, 0.0, 1.0, 0.25);
        let m = mirror(&swap);
        assert!(swap
            .legs
            .iter()
            .zip(&m.legs)
            .all(|(a, b)| a.direction == b.direction.flip()));
    }
}

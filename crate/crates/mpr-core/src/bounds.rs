use crate::construct::{kg_components, plan_selector};
use crate::error::{Error, Result};
use crate::params::{KGParams, SelectorParams};
use serde::Serialize;
use std::f64::consts::{E, PI};
use std::sync::OnceLock;

/// A closed-form bound evaluated at concrete parameters. `raw` is the exact
/// floating-point value of the formula; `integral` rounds it to the smallest
/// useful whole number of slots (0 when the bound is vacuous or undefined).
/// When a hypothesis of the underlying statement fails, the value is still
/// computed but `preconditions_met` is false and `notes` says which hypothesis
/// broke.
#[derive(Clone, Debug, Serialize)]
pub struct BoundValue {
    pub name: String,
    pub raw: f64,
    pub integral: i64,
    pub preconditions_met: bool,
    pub notes: String,
}

impl BoundValue {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bound serialization cannot fail")
    }

    fn integral_from(raw: f64) -> i64 {
        if raw.is_finite() && raw > 0.0 {
            raw.ceil() as i64
        } else {
            0
        }
    }
}

const LN_FACT_TABLE_SIZE: usize = 1025;
static LN_FACT_TABLE: OnceLock<Vec<f64>> = OnceLock::new();

/// Natural log of `n!`, exact summation for small `n` and a Stirling series
/// beyond the table (absolute error far below 1e-12 for all supported sizes).
pub fn ln_factorial(n: u64) -> f64 {
    let table = LN_FACT_TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; LN_FACT_TABLE_SIZE];
        for i in 1..LN_FACT_TABLE_SIZE {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if (n as usize) < LN_FACT_TABLE_SIZE {
        return table[n as usize];
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// Natural log of the binomial coefficient `C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// The transmission probability the randomized construction uses for one
/// row entry: `d/(2k)` when `d <= 2`, else `d/(4k)`.
pub fn prescribed_p(k: u32, d: u32) -> f64 {
    if d <= 2 {
        d as f64 / (2.0 * k as f64)
    } else {
        d as f64 / (4.0 * k as f64)
    }
}

/// Failure probabilities of a single Bernoulli(`p`) row against a fixed
/// `k`-subset and a fixed station inside it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct P1P2 {
    /// Probability that the row is useless for the subset: its restricted
    /// weight is 0 or exceeds `d`.
    pub p1: f64,
    /// Probability that the row is light (weight in `1..=d`) but misses the
    /// distinguished station while at most `m - 1` stations remain uncovered.
    pub p2: f64,
    /// `-ln(p1 + p2)`: the per-row progress rate of the construction.
    pub log_rate: f64,
}

/// Exact `P1`/`P2` for row probability `p` against parameters `(k, m, d)`.
/// Computed in log space so the values stay accurate for large `k`.
pub fn p1p2(k: u32, m: u32, d: u32, p: f64) -> Result<P1P2> {
    if !(1 <= m && m <= k && d >= 1) {
        return Err(Error::InvalidParams(format!(
            "need 1 <= m <= k and d >= 1, got k={k}, m={m}, d={d}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!(
            "row probability must lie strictly between 0 and 1, got {p}"
        )));
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let kf = k as u64;
    // P1 = Pr[weight = 0] + Pr[weight > d], summed in log space.
    let mut p1 = (kf as f64 * ln_q).exp();
    for i in (d as u64 + 1)..=kf {
        p1 += (ln_choose(kf, i) + i as f64 * ln_p + (kf - i) as f64 * ln_q).exp();
    }
    // P2 = (1-p)^k * sum_{i=1}^{d} C(m-1, i) (p/(1-p))^i.
    let mut p2 = 0.0;
    let top = (d as u64).min(m as u64 - 1);
    for i in 1..=top {
        p2 += (kf as f64 * ln_q + ln_choose(m as u64 - 1, i) + i as f64 * (ln_p - ln_q)).exp();
    }
    Ok(P1P2 {
        p1,
        p2,
        log_rate: -(p1 + p2).ln(),
    })
}

/// Guaranteed lower bound on `-ln(P1 + P2)` at the prescribed `p`:
/// `1/16` when `d <= 2`, else `d(k - m + 1)/(4k) - ln(4/3)`.
/// Requires `1 <= d <= m <= k` and `2(m - 1) < k`.
pub fn claim1_rate(k: u32, m: u32, d: u32) -> Result<f64> {
    if !(1 <= d && d <= m && m <= k) {
        return Err(Error::InvalidParams(format!(
            "need 1 <= d <= m <= k, got k={k}, m={m}, d={d}"
        )));
    }
    if 2 * (m - 1) >= k {
        return Err(Error::InvalidParams(format!(
            "need 2(m-1) < k, got k={k}, m={m}"
        )));
    }
    Ok(if d <= 2 {
        1.0 / 16.0
    } else {
        d as f64 * (k - m + 1) as f64 / (4.0 * k as f64) - (4.0f64 / 3.0).ln()
    })
}

/// Closed-form upper bound on the shortest `(k, m, d, n)`-selector. Natural
/// logarithms; the `d <= 2` branch multiplies the entropy numerator by 16,
/// the `d >= 3` branch divides it by the rate from [`claim1_rate`].
pub fn tsel_upper(p: &SelectorParams) -> BoundValue {
    let (k, m, d, n) = (p.k as f64, p.m as f64, p.d, p.n as f64);
    let kk = p.k;
    let mm = p.m;
    let num = k * (n / k).ln() + (k - m + 1.0) * (k / (k - m + 1.0)).ln() + 2.0 * k - m + 1.0;
    let (raw, branch) = if d <= 2 {
        (16.0 * num, "d <= 2: length <= 16 * numerator".to_string())
    } else {
        let denom = d as f64 * (k - m + 1.0) / (4.0 * k) - (4.0f64 / 3.0).ln();
        (
            num / denom,
            format!("d >= 3: length <= numerator / rate, rate = {denom}"),
        )
    };
    let mut notes = vec![branch];
    let mut ok = true;
    if !p.is_strict() {
        ok = false;
        notes.push(format!("hypothesis d <= m fails (d={}, m={mm})", p.d));
    }
    if 2 * (mm.saturating_sub(1)) >= kk {
        ok = false;
        notes.push(format!("hypothesis 2(m-1) < k fails (k={kk}, m={mm})"));
    }
    if !raw.is_finite() || raw <= 0.0 {
        notes.push("value is not a usable length; integral clamped to 0".to_string());
    }
    BoundValue {
        name: "tsel_upper".into(),
        raw,
        integral: BoundValue::integral_from(raw),
        preconditions_met: ok,
        notes: notes.join("; "),
    }
}

/// Length of the recursive conflict-resolution construction at the given
/// failure budget: the planned lengths of its halving selector components
/// plus one final broadcast slot. Always well-defined for valid `(k, d, n)`;
/// errors only when `eps` is outside `(0, 1]`.
pub fn tkg_upper_explicit(p: &KGParams, eps: f64) -> Result<BoundValue> {
    let components = kg_components(p);
    let mut total: u64 = 1;
    let mut parts = Vec::new();
    let mut closed_form = 1.0f64;
    for c in &components {
        let plan = plan_selector(c, eps)?;
        total += plan.t as u64;
        closed_form += tsel_upper(c).raw;
        parts.push(format!(
            "(k={}, m={}, d={}, n={}) -> t={}",
            c.k, c.m, c.d, c.n, plan.t
        ));
    }
    let notes = if parts.is_empty() {
        "no selector components (k <= d or k = 1); one broadcast slot".to_string()
    } else {
        format!(
            "components: {}; plus one broadcast slot; closed-form comparison value {:.3}",
            parts.join(", "),
            closed_form
        )
    };
    Ok(BoundValue {
        name: "tkg_upper_explicit".into(),
        raw: total as f64,
        integral: total as i64,
        preconditions_met: true,
        notes,
    })
}

fn tlt_common(name: &str, u: i64, k: u32, d: u32, n: u32, pre_factor: u32) -> BoundValue {
    let mut notes = Vec::new();
    let arg = n as f64 / (k as f64 * (d as f64 + 1.0));
    let raw = if u >= 1 {
        let uf = u as f64;
        uf / (E * uf).log2() * arg.log2()
    } else {
        notes.push(format!("prefactor undefined (floor(k/(d+1)) leaves u={u})"));
        0.0
    };
    let ok = pre_factor * (d + 1) <= k && k <= n;
    if !ok {
        notes.push(format!(
            "hypothesis {pre_factor}(d+1) <= k <= n fails (k={k}, d={d}, n={n})"
        ));
    }
    if raw <= 0.0 && u >= 1 {
        notes.push(format!(
            "vacuous: n <= k(d+1) makes the logarithm nonpositive (n={n}, k={k}, d={d})"
        ));
    }
    if notes.is_empty() {
        notes.push("base-2 logarithms".to_string());
    }
    BoundValue {
        name: name.into(),
        raw,
        integral: BoundValue::integral_from(raw),
        preconditions_met: ok,
        notes: notes.join("; "),
    }
}

/// Lower bound on the length of any schedule that is locally thin for all
/// subset sizes `d..=k`. Base-2 logarithms; `u = floor(k/(d+1))`.
pub fn tlt_lower_leq(p: &KGParams) -> BoundValue {
    let u = (p.k / (p.d + 1)) as i64;
    tlt_common("tlt_lower_leq", u, p.k, p.d, p.n, 3)
}

/// Lower bound on the length of any schedule that is locally thin for size
/// exactly `k`; the weaker prefactor uses `u - 1`.
pub fn tlt_lower_exact(p: &KGParams) -> BoundValue {
    let u = (p.k / (p.d + 1)) as i64 - 1;
    tlt_common("tlt_lower_exact", u, p.k, p.d, p.n, 4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn ln_factorial_table_and_stirling_agree() {
        // Direct summation as an independent check, including beyond the table.
        for n in [0u64, 1, 2, 10, 1024, 1025, 5000] {
            let direct: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
            close(ln_factorial(n), direct, 1e-8 * direct.max(1.0));
        }
    }

    #[test]
    fn ln_choose_values() {
        close(ln_choose(4, 2), 6.0f64.ln(), 1e-12);
        close(ln_choose(52, 5), 2598960.0f64.ln(), 1e-9);
        assert_eq!(ln_choose(3, 5), f64::NEG_INFINITY);
        assert_eq!(ln_choose(7, 0), 0.0);
        // Large arguments stay finite and sane: C(1e6, 2) = n(n-1)/2.
        close(
            ln_choose(1_000_000, 2),
            (1_000_000.0f64 * 999_999.0 / 2.0).ln(),
            1e-6,
        );
    }

    #[test]
    fn prescribed_p_branches() {
        close(prescribed_p(2, 1), 0.25, 0.0);
        close(prescribed_p(4, 2), 0.25, 0.0);
        close(prescribed_p(8, 3), 3.0 / 32.0, 0.0);
        close(prescribed_p(16, 8), 0.125, 0.0);
    }

    #[test]
    fn p1p2_known_values() {
        // k=2, m=1, d=1, p=1/4: P1 = 1 - 2*(1/4)*(3/4) = 5/8, P2 = 0.
        let v = p1p2(2, 1, 1, 0.25).unwrap();
        close(v.p1, 0.625, 1e-12);
        close(v.p2, 0.0, 0.0);
        close(v.log_rate, -(0.625f64).ln(), 1e-12);
        // k=4, m=3, d=4, p=1/2: weight can never exceed d, so P1 = (1/2)^4;
        // P2 = (1/2)^4 * (C(2,1) + C(2,2)) = 3/16.
        let v = p1p2(4, 3, 4, 0.5).unwrap();
        close(v.p1, 0.0625, 1e-12);
        close(v.p2, 0.1875, 1e-12);
    }

    #[test]
    fn p1_matches_direct_summation() {
        for (k, m, d) in [(6u32, 3u32, 2u32), (10, 4, 3), (9, 5, 1)] {
            let p = prescribed_p(k, d);
            let v = p1p2(k, m, d, p).unwrap();
            let mut hit = 0.0;
            for i in 1..=d as i32 {
                hit += (ln_choose(k as u64, i as u64)
                    + i as f64 * p.ln()
                    + (k as f64 - i as f64) * (-p).ln_1p())
                .exp();
            }
            close(v.p1, 1.0 - hit, 1e-12);
            assert!(v.p1 > 0.0 && v.p1 < 1.0);
            assert!(v.p2 >= 0.0);
        }
    }

    #[test]
    fn p1p2_rejects_bad_inputs() {
        assert!(p1p2(2, 3, 1, 0.25).is_err()); // m > k
        assert!(p1p2(2, 1, 0, 0.25).is_err()); // d = 0
        assert!(p1p2(2, 1, 1, 0.0).is_err());
        assert!(p1p2(2, 1, 1, 1.0).is_err());
    }

    #[test]
    fn claim1_values_and_guarantee() {
        close(claim1_rate(2, 1, 1).unwrap(), 1.0 / 16.0, 0.0);
        close(claim1_rate(8, 4, 3).unwrap(), 0.18106792754821915, 1e-12);
        assert!(claim1_rate(4, 3, 1).is_err()); // 2(m-1) = 4 >= k
        assert!(claim1_rate(4, 2, 3).is_err()); // d > m
        // The exact rate at the prescribed p dominates the claimed rate.
        for (k, m, d) in [(2u32, 1u32, 1u32), (8, 4, 3), (16, 8, 5), (33, 17, 4)] {
            let rate = claim1_rate(k, m, d).unwrap();
            let exact = p1p2(k, m, d, prescribed_p(k, d)).unwrap().log_rate;
            assert!(
                exact >= rate - 1e-9,
                "exact {exact} < claimed {rate} at k={k}, m={m}, d={d}"
            );
        }
    }

    #[test]
    fn tsel_upper_frozen_values() {
        let b = tsel_upper(&SelectorParams::new(4, 2, 1, 16).unwrap());
        close(b.raw, 214.53157858935847, 1e-9);
        assert_eq!(b.integral, 215);
        assert!(b.preconditions_met);

        let b = tsel_upper(&SelectorParams::new(8, 4, 3, 64).unwrap());
        close(b.raw, 176.64945367615962, 1e-9);
        assert_eq!(b.integral, 177);
        assert!(b.preconditions_met);
    }

    #[test]
    fn tsel_upper_flags_broken_hypotheses() {
        // 2(m-1) >= k.
        let b = tsel_upper(&SelectorParams::new(4, 4, 1, 16).unwrap());
        assert!(!b.preconditions_met);
        assert!(b.notes.contains("2(m-1) < k"));
        // Relaxed d > m.
        let b = tsel_upper(&SelectorParams::new_relaxed(4, 2, 3, 16).unwrap());
        assert!(!b.preconditions_met);
        assert!(b.notes.contains("d <= m"));
    }

    #[test]
    fn tkg_explicit_frozen_values() {
        // k=2, d=2: no components, just the broadcast slot.
        let b = tkg_upper_explicit(&KGParams::new(2, 2, 4).unwrap(), 1.0).unwrap();
        assert_eq!(b.raw, 1.0);
        assert_eq!(b.integral, 1);
        assert!(b.preconditions_met);
        // k=4, d=1, n=8 at eps=1: components (4,2,1,8) t=20 and (2,1,1,8) t=8.
        let b = tkg_upper_explicit(&KGParams::new(4, 1, 8).unwrap(), 1.0).unwrap();
        assert_eq!(b.integral, 29);
        assert!(b.notes.contains("t=20") && b.notes.contains("t=8"));
        assert!(tkg_upper_explicit(&KGParams::new(4, 1, 8).unwrap(), 0.0).is_err());
        assert!(tkg_upper_explicit(&KGParams::new(4, 1, 8).unwrap(), 1.5).is_err());
    }

    #[test]
    fn tlt_frozen_values() {
        let b = tlt_lower_leq(&KGParams::new(9, 2, 216).unwrap());
        close(b.raw, 2.9725951090273464, 1e-9);
        assert_eq!(b.integral, 3);
        assert!(b.preconditions_met);

        let b = tlt_lower_exact(&KGParams::new(12, 2, 288).unwrap());
        close(b.raw, 2.9725951090273464, 1e-9);
        assert_eq!(b.integral, 3);
        assert!(b.preconditions_met);
    }

    #[test]
    fn tlt_vacuous_and_violated() {
        // n too small: logarithm nonpositive -> integral 0, note says vacuous.
        let b = tlt_lower_leq(&KGParams::new(9, 2, 20).unwrap());
        assert!(b.raw <= 0.0);
        assert_eq!(b.integral, 0);
        assert!(b.notes.contains("vacuous"));
        // k below the hypothesis threshold.
        let b = tlt_lower_leq(&KGParams::new(5, 2, 216).unwrap());
        assert!(!b.preconditions_met);
        // u = 0 for the exact variant when k/(d+1) < 2.
        let b = tlt_lower_exact(&KGParams::new(5, 2, 216).unwrap());
        assert_eq!(b.raw, 0.0);
        assert_eq!(b.integral, 0);
        assert!(!b.preconditions_met);
    }

    #[test]
    fn bound_json_shape() {
        let b = tlt_lower_leq(&KGParams::new(9, 2, 216).unwrap());
        let json = b.to_json();
        assert!(json.starts_with("{\"name\":\"tlt_lower_leq\",\"raw\":2.97259"));
        assert!(json.contains("\"integral\":3"));
        assert!(json.contains("\"preconditions_met\":true"));
    }
}

//! Closed-form expectations for the chain model.
//!
//! Span `k` heralds after `N_k ~ Geometric(p_k)` attempts of length `t_k`,
//! i.e. at `G_k = N_k t_k`. A round succeeds when every pair is ready within
//! the memory cutoff `c` of the first one (`max G − min G ≤ c`); otherwise it
//! ends at `min G + c`. Because the `G_k` are independent, every quantity
//! conditioned on the maximum (or minimum) being a particular lattice point
//! factorizes over spans, so each expectation is a single sweep over the
//! merged lattice of ready times.

use crate::error::{Error, Result};

use super::bell::BellDiagonal;
use super::model::ChainModel;
use super::{EndToEndResult, RepeaterChain};

/// Sweep budget before the analytic engine gives up.
const MAX_LATTICE_POINTS: u64 = 200_000_000;
/// Probability mass beyond the sweep horizon.
const TAIL_TOLERANCE: f64 = 1e-15;
/// Ready times closer than this fraction of a period count as tied.
pub(crate) const TIE_EPS: f64 = 1e-9;

/// Timing parameters of one span for [`round_statistics`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkTiming {
    /// Attempt duration, s.
    pub period: f64,
    /// Per-attempt success probability.
    pub success: f64,
    /// Combined memory decay rate of the stored pair, 1/s.
    pub decay_rate: f64,
}

/// Expectations over one generation round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundStatistics {
    /// Probability that all pairs are ready within the cutoff.
    pub ok_probability: f64,
    /// Expected round duration up to the swap (or abort), s.
    pub expected_duration: f64,
    /// `E[Π_k exp(−decay_k (max G − G_k)) · 1{ok}]`.
    pub expected_decay_ok: f64,
}

struct Geo {
    t: f64,
    p: f64,
    log_q: f64,
    a: f64,
}

impl Geo {
    fn new(l: &LinkTiming) -> Self {
        Self {
            t: l.period,
            p: l.success,
            log_q: (-l.success).ln_1p(),
            a: l.decay_rate,
        }
    }

    /// `P(N > n)`.
    fn survival(&self, n: i64) -> f64 {
        if n <= 0 {
            1.0
        } else if self.p >= 1.0 {
            0.0
        } else {
            (n as f64 * self.log_q).exp()
        }
    }

    /// Attempt-count range whose ready time lies in the given window.
    fn range(&self, lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> (i64, i64) {
        let lo_n = if lo_open {
            (lo / self.t + TIE_EPS).floor() as i64 + 1
        } else {
            (lo / self.t - TIE_EPS).ceil() as i64
        };
        let hi_n = if hi_open {
            (hi / self.t - TIE_EPS).ceil() as i64 - 1
        } else {
            (hi / self.t + TIE_EPS).floor() as i64
        };
        (lo_n.max(1), hi_n)
    }

    fn mass(&self, (lo, hi): (i64, i64)) -> f64 {
        if hi < lo {
            0.0
        } else {
            self.survival(lo - 1) - self.survival(hi)
        }
    }

    /// `Σ_{n=lo}^{hi} P(N=n) exp(−a (m − n t))`.
    fn weighted(&self, m: f64, (lo, hi): (i64, i64)) -> f64 {
        if hi < lo {
            return 0.0;
        }
        if self.p >= 1.0 {
            return if lo <= 1 && 1 <= hi {
                (-self.a * (m - self.t)).exp()
            } else {
                0.0
            };
        }
        let first = self.p * self.survival(lo - 1) * (-self.a * (m - lo as f64 * self.t)).exp();
        let log_ratio = self.log_q + self.a * self.t;
        let count = hi as f64 - lo as f64 + 1.0;
        let series = if log_ratio.abs() < 1e-300 {
            count
        } else {
            (count * log_ratio).exp_m1() / log_ratio.exp_m1()
        };
        first * series
    }
}

/// `P(all G_k ≥ s (or > s), some G_k > s + c)`, telescoped so that no
/// near-one probabilities are subtracted.
fn beyond_cutoff(geos: &[Geo], s: f64, c: f64, strict: bool) -> f64 {
    let mut total = 0.0;
    let mut within_before = 1.0;
    for (j, g) in geos.iter().enumerate() {
        let (lo, hi) = g.range(s, strict, s + c, false);
        let tail = g.survival(hi.max(lo - 1));
        let after: f64 = geos[j + 1..]
            .iter()
            .map(|h| h.survival(h.range(s, strict, s, false).0 - 1))
            .product();
        total += within_before * tail * after;
        within_before *= g.mass((lo, hi));
    }
    total
}

/// Exact round expectations for independent geometric ready times.
pub fn round_statistics(links: &[LinkTiming], cutoff: f64) -> Result<RoundStatistics> {
    if links.is_empty() {
        return Err(Error::InvalidChain("no links".into()));
    }
    if let Some(bad) = links
        .iter()
        .find(|l| !(l.period > 0.0) || !(l.success > 0.0 && l.success <= 1.0))
    {
        return Err(Error::InvalidChain(format!("invalid link timing {bad:?}")));
    }
    let geos: Vec<Geo> = links.iter().map(Geo::new).collect();
    if geos.len() == 1 {
        let g = &geos[0];
        return Ok(RoundStatistics {
            ok_probability: 1.0,
            expected_duration: g.t / g.p,
            expected_decay_ok: 1.0,
        });
    }

    let c = cutoff;
    let mut next: Vec<i64> = vec![1; geos.len()];
    let mut ok = 0.0;
    let mut max_ok = 0.0;
    let mut decay_ok = 0.0;
    let mut aborted = 0.0;
    let mut visited = 0u64;
    loop {
        let m = geos
            .iter()
            .zip(&next)
            .map(|(g, &n)| n as f64 * g.t)
            .fold(f64::INFINITY, f64::min);

        // m as the maximum of an ok round.
        let closed: Vec<(i64, i64)> = geos.iter().map(|g| g.range(m - c, false, m, false)).collect();
        let open: Vec<(i64, i64)> = geos.iter().map(|g| g.range(m - c, false, m, true)).collect();
        let mass_closed: f64 = geos.iter().zip(&closed).map(|(g, &r)| g.mass(r)).product();
        let mass_open: f64 = geos.iter().zip(&open).map(|(g, &r)| g.mass(r)).product();
        ok += mass_closed - mass_open;
        max_ok += m * (mass_closed - mass_open);
        let w_closed: f64 = geos.iter().zip(&closed).map(|(g, &r)| g.weighted(m, r)).product();
        let w_open: f64 = geos.iter().zip(&open).map(|(g, &r)| g.weighted(m, r)).product();
        decay_ok += w_closed - w_open;

        // m as the minimum of an aborted round: all G ≥ m with some G > m + c,
        // minus the same with all G > m.
        let inclusive = beyond_cutoff(&geos, m, c, false);
        let exclusive = beyond_cutoff(&geos, m, c, true);
        let abort_here = inclusive - exclusive;
        if abort_here != 0.0 {
            aborted += (m + c) * abort_here;
        }

        for (g, n) in geos.iter().zip(next.iter_mut()) {
            if (*n as f64 * g.t - m).abs() <= TIE_EPS * m {
                *n += 1;
            }
        }

        let all_done: f64 = geos
            .iter()
            .map(|g| 1.0 - g.survival((m / g.t + TIE_EPS).floor() as i64))
            .product();
        if 1.0 - all_done < TAIL_TOLERANCE {
            break;
        }
        visited += 1;
        if visited > MAX_LATTICE_POINTS {
            return Err(Error::InvalidChain(
                "analytic sweep exceeded its budget; spans are too lossy".into(),
            ));
        }
    }

    Ok(RoundStatistics {
        ok_probability: ok,
        expected_duration: max_ok + aborted,
        expected_decay_ok: decay_ok,
    })
}

/// Expected fidelity, rate and latency of the chain model, computed on
/// Bell-diagonal weights with exact round expectations.
pub fn simulate_chain_analytic(chain: &RepeaterChain) -> Result<EndToEndResult> {
    let model = ChainModel::new(chain)?;
    let timings: Vec<LinkTiming> = model
        .links
        .iter()
        .map(|l| LinkTiming {
            period: l.period,
            success: l.success,
            decay_rate: l.decay_rate,
        })
        .collect();
    let stats = round_statistics(&timings, model.cutoff)?;
    if !(stats.ok_probability > 0.0) {
        return Err(Error::Stalled(0));
    }

    let mut weights = model.links.iter().map(|l| BellDiagonal::from_state(&l.state));
    let mut acc = weights.next().expect("chains have at least one span");
    for (node, right) in model.nodes.iter().zip(weights) {
        acc = acc.swap(&right, node.bsm_visibility_penalty);
    }
    let retained = stats.expected_decay_ok / stats.ok_probability
        * (-model.confirmation_latency * model.end_decay_rate()).exp();
    let delivered = acc.depolarized(retained);

    let latency = model.confirmation_latency;
    let per_round = stats.ok_probability * model.swap_success();
    let pair_rate = per_round / (stats.expected_duration + stats.ok_probability * latency);
    Ok(EndToEndResult {
        werner_fidelity: delivered.fidelity(),
        pair_rate,
        mean_latency: 1.0 / pair_rate,
        trials: 0,
        fidelity_stderr: 0.0,
        pair_rate_stderr: 0.0,
        latency_stderr: 0.0,
        state: delivered.to_state(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct enumeration over joint attempt counts for two spans.
    fn brute_force(links: &[LinkTiming; 2], cutoff: f64) -> RoundStatistics {
        let (l1, l2) = (&links[0], &links[1]);
        let n_max = 4000;
        let (mut ok, mut dur, mut dec) = (0.0, 0.0, 0.0);
        for n1 in 1..n_max {
            let p1 = l1.success * (1.0 - l1.success).powi(n1 - 1);
            if p1 < 1e-300 {
                break;
            }
            for n2 in 1..n_max {
                let p2 = l2.success * (1.0 - l2.success).powi(n2 - 1);
                if p2 < 1e-300 {
                    break;
                }
                let (g1, g2) = (n1 as f64 * l1.period, n2 as f64 * l2.period);
                let (hi, lo) = (g1.max(g2), g1.min(g2));
                let pr = p1 * p2;
                if hi - lo <= cutoff + 1e-9 {
                    ok += pr;
                    dur += pr * hi;
                    dec += pr * (-l1.decay_rate * (hi - g1) - l2.decay_rate * (hi - g2)).exp();
                } else {
                    dur += pr * (lo + cutoff);
                }
            }
        }
        RoundStatistics {
            ok_probability: ok,
            expected_duration: dur,
            expected_decay_ok: dec,
        }
    }

    fn close(a: &RoundStatistics, b: &RoundStatistics) -> bool {
        (a.ok_probability - b.ok_probability).abs() < 1e-10
            && (a.expected_duration - b.expected_duration).abs() < 1e-10 * b.expected_duration.max(1.0)
            && (a.expected_decay_ok - b.expected_decay_ok).abs() < 1e-10
    }

    #[test]
    fn matches_enumeration_for_identical_spans() {
        let l = LinkTiming {
            period: 1.0,
            success: 0.05,
            decay_rate: 0.02,
        };
        let links = [l, l];
        for cutoff in [3.0, 10.5, 1e9] {
            let got = round_statistics(&links, cutoff).unwrap();
            let want = brute_force(&links, cutoff);
            assert!(close(&got, &want), "cutoff {cutoff}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn matches_enumeration_for_distinct_spans() {
        let links = [
            LinkTiming {
                period: 0.7,
                success: 0.08,
                decay_rate: 0.05,
            },
            LinkTiming {
                period: 1.3,
                success: 0.03,
                decay_rate: 0.01,
            },
        ];
        for cutoff in [0.5, 4.0, 20.0] {
            let got = round_statistics(&links, cutoff).unwrap();
            let want = brute_force(&links, cutoff);
            assert!(close(&got, &want), "cutoff {cutoff}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn single_link_is_geometric() {
        let l = LinkTiming {
            period: 2.0,
            success: 0.25,
            decay_rate: 1.0,
        };
        let s = round_statistics(&[l], 0.1).unwrap();
        assert_eq!(s.ok_probability, 1.0);
        assert_eq!(s.expected_duration, 8.0);
    }

    #[test]
    fn deterministic_links() {
        let l = LinkTiming {
            period: 1.0,
            success: 1.0,
            decay_rate: 0.3,
        };
        let s = round_statistics(&[l, l, l], 0.5).unwrap();
        assert!((s.ok_probability - 1.0).abs() < 1e-15);
        assert!((s.expected_duration - 1.0).abs() < 1e-15);
        assert!((s.expected_decay_ok - 1.0).abs() < 1e-15);
    }
}

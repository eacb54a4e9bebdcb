use crate::error::{domain, Result};
use crate::fidelity::Structure;
use crate::optimal_states::{CollinearConfig, CollinearTerm};
use crate::spin_algebra::SpinSector;

/// Slack on the local-length equality when deciding feasibility of a vertex.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Signed variables `(two_j, +-1)`; spin zero carries no direction and appears once.
fn variables(n: u32) -> Vec<(u32, f64)> {
    SpinSector::all(n)
        .flat_map(|s| match s.two_j() {
            0 => vec![(0, 1.0)],
            t => vec![(t, 1.0), (t, -1.0)],
        })
        .collect()
}

/// Enumerates every vertex of
/// `{ sum p = 1, sum p two_j s = rN, p >= 0 }` and keeps the best by `structure`.
///
/// With two equality constraints every vertex has at most two non-zero weights.
fn best_vertex(
    n: u32,
    r: f64,
    structure: Structure,
    allow_same_sector: bool,
) -> Result<CollinearConfig> {
    if n < 2 {
        return Err(domain("enumeration needs n >= 2"));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(domain(format!("Bloch length {r} outside [0, 1]")));
    }
    let target = r * n as f64;
    let vars = variables(n);
    let mut best: Option<(f64, CollinearConfig)> = None;
    let mut consider = |config: CollinearConfig| {
        let value = config.delta(structure);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, config));
        }
    };
    for (i, &(ti, si)) in vars.iter().enumerate() {
        let vi = ti as f64 * si;
        if (vi - target).abs() <= FEASIBILITY_TOL {
            consider(CollinearConfig {
                n,
                terms: vec![CollinearTerm {
                    two_j: ti,
                    weight: 1.0,
                    signed_length: si,
                }],
            });
        }
        for &(tk, sk) in &vars[i + 1..] {
            if ti == tk && !allow_same_sector {
                continue;
            }
            let vk = tk as f64 * sk;
            if (vi - vk).abs() < FEASIBILITY_TOL {
                continue;
            }
            let t = (target - vk) / (vi - vk);
            if !(0.0..=1.0).contains(&t) {
                continue;
            }
            consider(CollinearConfig {
                n,
                terms: vec![
                    CollinearTerm {
                        two_j: ti,
                        weight: t,
                        signed_length: si,
                    },
                    CollinearTerm {
                        two_j: tk,
                        weight: 1.0 - t,
                        signed_length: sk,
                    },
                ],
            });
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| domain(format!("no feasible configuration for n={n}, r={r}")))
}

/// Best unknown-structure configuration by exhaustive vertex enumeration.
pub fn best_unknown_vertex(n: u32, r: f64) -> Result<CollinearConfig> {
    best_vertex(n, r, Structure::Unknown, true)
}

/// Best known-structure configuration over single sectors and pairs of distinct
/// sectors with either orientation.
pub fn best_known_pair(n: u32, r: f64) -> Result<CollinearConfig> {
    best_vertex(n, r, Structure::Known, false)
}

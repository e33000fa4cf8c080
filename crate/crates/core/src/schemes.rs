//! Two-phase retrospective interference-alignment schemes: per-corner
//! parameters (W, W1, W2 and the special per-phase symbol counts), the
//! closed-form rank terms r1/r2/r3 with the rank condition, and the block
//! coefficient matrix each receiver must invert.

use thiserror::Error;

use crate::config::{AntennaConfig, ConfigClass};
use crate::field::Scalar;
use crate::geometry::DofPoint;
use crate::linalg::Matrix;
use crate::regions::corner_formula;
use crate::streams::MatrixSource;
use crate::Rat;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("corner {label:?} is not defined for class {class} of {cfg:?}; valid corners: {valid:?}")]
    UnknownCorner { cfg: AntennaConfig, class: &'static str, label: String, valid: Vec<&'static str> },
    #[error("{0}")]
    Invalid(String),
}

/// Scheme payload beyond the common (W, W1, W2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeVariant {
    /// Plain two-phase scheme: fresh symbols at full effective antenna rate
    /// in phase one, random combinations of created interference in phase two.
    Generic,
    /// Generic scheme with transmitter two restricted to `m2_eff` antennas
    /// (corner T4 in class C61, and corner T7 in S, where m2_eff = N1+N2-M1).
    ReducedTx2 { m2_eff: u32 },
    /// Corner T5 in class S1: transmitter one sends `nu1` pooled symbols in
    /// phase one and `nu2` in phase two.
    S1T5 { nu: u32, nu1: u32, nu2: u32 },
    /// Corner T8 in class S1: transmitter one sends `mu1` pooled symbols in
    /// phase one and `mu2` in phase two; receiver two is overdetermined and
    /// decodes in two stages.
    S1T8 { mu1: u32, mu2: u32 },
    /// Corner T9 in class S2: transmitter two sends `omega[t]` fresh symbols
    /// in phase-one slot t; transmitter one sends `eta1` pooled symbols in
    /// phase one and `eta2` in phase two.
    S2T9 { eta1: u32, eta2: u32, omega: Vec<u32> },
}

/// A fully specified two-phase scheme for one corner point.
#[derive(Clone, Debug)]
pub struct SchemeSpec {
    pub config: AntennaConfig,
    pub corner: String,
    /// DoF pair this scheme is meant to achieve.
    pub point: DofPoint,
    /// Total channel uses.
    pub w: u32,
    /// Transmitter-one phase-one length.
    pub w1: u32,
    /// Transmitter-two phase-one length.
    pub w2: u32,
    pub variant: SchemeVariant,
}

impl SchemeSpec {
    /// A generic-variant spec with explicit (W, W1, W2); used for the rank
    /// calculus on arbitrary parameters, not only corner prescriptions.
    pub fn generic(config: AntennaConfig, w: u32, w1: u32, w2: u32) -> Self {
        assert!(w >= 1 && w1 >= 1 && w2 >= 1 && w1 <= w && w2 <= w, "phase lengths out of range");
        let point = DofPoint::new(
            Rat::new((config.m1_prime() * w1) as i64, w as i64),
            Rat::new((config.m2_prime() * w2) as i64, w as i64),
        );
        SchemeSpec { config, corner: String::new(), point, w, w1, w2, variant: SchemeVariant::Generic }
    }

    /// Effective transmit antennas of transmitter one.
    pub fn m1_eff(&self) -> u32 {
        self.config.m1_prime()
    }

    /// Effective transmit antennas of transmitter two (reduced for T4/C61
    /// and T7).
    pub fn m2_eff(&self) -> u32 {
        match self.variant {
            SchemeVariant::ReducedTx2 { m2_eff } => m2_eff,
            _ => self.config.m2_prime(),
        }
    }

    /// True for the variants that follow the generic phase structure and are
    /// covered by the closed-form rank terms.
    pub fn is_generic_like(&self) -> bool {
        matches!(self.variant, SchemeVariant::Generic | SchemeVariant::ReducedTx2 { .. })
    }

    /// Information symbols sent for (user 1, user 2) over the whole block.
    pub fn symbol_counts(&self) -> (u64, u64) {
        match &self.variant {
            SchemeVariant::Generic | SchemeVariant::ReducedTx2 { .. } => (
                (self.m1_eff() * self.w1) as u64,
                (self.m2_eff() * self.w2) as u64,
            ),
            SchemeVariant::S1T5 { nu1, nu2, .. } => (
                (nu1 + nu2) as u64,
                (self.config.m2() * self.w1) as u64,
            ),
            SchemeVariant::S1T8 { mu1, mu2 } => (
                (mu1 + mu2) as u64,
                (self.config.m2() * self.w1) as u64,
            ),
            SchemeVariant::S2T9 { eta1, eta2, omega } => (
                (eta1 + eta2) as u64,
                omega.iter().map(|&o| o as u64).sum(),
            ),
        }
    }

    /// Exact DoF pair (symbols per channel use).
    pub fn dof(&self) -> DofPoint {
        let (s1, s2) = self.symbol_counts();
        DofPoint::new(Rat::new(s1 as i64, self.w as i64), Rat::new(s2 as i64, self.w as i64))
    }
}

/// Corner labels for which this class prescribes a two-phase scheme.
pub fn scheme_labels(class: ConfigClass) -> Vec<&'static str> {
    match class {
        ConfigClass::C1 | ConfigClass::C2 => vec![],
        ConfigClass::C3 => vec!["Q3"],
        ConfigClass::C4 => vec!["P3"],
        ConfigClass::C5 => vec!["S3"],
        ConfigClass::C61 | ConfigClass::C62 => vec!["T4"],
        ConfigClass::C63 => vec!["T5", "T6"],
        ConfigClass::S1 => vec!["T5", "T7", "T8"],
        ConfigClass::S2 => vec!["T7", "T9"],
    }
}

/// Construct the prescribed scheme for one named corner of the achievable
/// region.
pub fn corner_scheme(cfg: &AntennaConfig, label: &str) -> Result<SchemeSpec, SchemeError> {
    let class = cfg.classify();
    let valid = scheme_labels(class);
    let err = || SchemeError::UnknownCorner {
        cfg: *cfg,
        class: class.label(),
        label: label.to_string(),
        valid: valid.clone(),
    };
    // The label must resolve to an actual interior vertex: degenerate
    // configurations (e.g. N1 = N2 collapsing T5 onto the d1 axis, or
    // M1 = N1 collapsing T6 onto T1) have no scheme for it. The raw formula
    // is used so that coincident labels (T8 = T5 on the boundary of S1)
    // still get their own scheme.
    if !valid.contains(&label) {
        return Err(err());
    }
    let Some(point) = corner_formula(cfg, label) else {
        return Err(err());
    };
    let zero = Rat::new(0, 1);
    if point.d1 == zero || point.d2 == zero {
        return Err(err());
    }
    let (m1, m2, n1, n2) = (cfg.m1(), cfg.m2(), cfg.n1(), cfg.n2());
    let (m1p, m2p) = (cfg.m1_prime(), cfg.m2_prime());
    let spec = match (class, label) {
        (ConfigClass::C3, "Q3") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: m1 * (m2p - n1),
            w1: n1 * (m2p - n2),
            w2: m1 * (n2 - n1),
            variant: SchemeVariant::Generic,
        },
        (ConfigClass::C4, "P3") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: m1p * m2p - n1 * n2,
            w1: n1 * (m2p - n2),
            w2: n2 * (m1p - n1),
            variant: SchemeVariant::Generic,
        },
        (ConfigClass::C5, "S3") | (ConfigClass::C63, "T6") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: n1,
            w1: n1,
            w2: n1 - m1,
            variant: SchemeVariant::Generic,
        },
        (ConfigClass::C61, "T4") => {
            let b = n1 + n2 - m1;
            SchemeSpec {
                config: *cfg,
                corner: label.to_string(),
                point,
                w: b,
                w1: b,
                w2: n2 - m1,
                variant: SchemeVariant::ReducedTx2 { m2_eff: b },
            }
        }
        (ConfigClass::C62, "T4") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: m2,
            w1: m2,
            w2: n2 - m1,
            variant: SchemeVariant::Generic,
        },
        (ConfigClass::C63, "T5") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: m1 * (m2p - n1),
            w1: n1 * (m2p - n2),
            w2: m1 * (n2 - n1),
            variant: SchemeVariant::Generic,
        },
        // Corner T7: restrict transmitter two to N1+N2-M1 antennas; the
        // reduced configuration falls in C63 and T7 is its corner T6, so the
        // T6 parameters apply with the reduced antenna count.
        (ConfigClass::S1 | ConfigClass::S2, "T7") => SchemeSpec {
            config: *cfg,
            corner: label.to_string(),
            point,
            w: n1,
            w1: n1,
            w2: n1 - m1,
            variant: SchemeVariant::ReducedTx2 { m2_eff: n1 + n2 - m1 },
        },
        (ConfigClass::S1, "T5") => {
            let nu = (n1 * (n2 - n1)).min(n2 * (m2 - n2));
            let nu1 = nu - (n2 - n1) * (m2 - n2);
            let nu2 = n2 * (m2 - n2) - nu;
            let (w, w1) = (m2 - n1, n2 - n1);
            if nu1 > m1 * w1 || nu2 > m1 * (w - w1) {
                return Err(SchemeError::Invalid(format!(
                    "pooled symbol counts nu1={nu1}, nu2={nu2} exceed transmit capacity for {cfg:?}"
                )));
            }
            SchemeSpec {
                config: *cfg,
                corner: label.to_string(),
                point,
                w,
                w1,
                w2: w - w1,
                variant: SchemeVariant::S1T5 { nu, nu1, nu2 },
            }
        }
        (ConfigClass::S1, "T8") => {
            let lambda = (m1 + m2 - n1 - n2) as u32;
            SchemeSpec {
                config: *cfg,
                corner: label.to_string(),
                point,
                w: n1 - lambda,
                w1: n1 - m1,
                w2: n1 - lambda - (n1 - m1),
                variant: SchemeVariant::S1T8 {
                    mu1: (n1 - m1) * (m1 - lambda),
                    mu2: m1 * (m1 - lambda),
                },
            }
        }
        (ConfigClass::S2, "T9") => {
            let b = n1 + n2 - m1; // = M2 - lambda
            let (w, w1) = (b, n2 - m1);
            let total = (n2 * b - n1 * n1) as u64;
            // Canonical greedy allocation. Per-slot floor: receiver two's
            // square system resolves each phase-one slot's N1+N2 equations
            // only if omega_t + M1 >= N1 + N2, so the floor is
            // B = N1+N2-M1 (> N2 here since M1 < N1). Per-slot cap:
            // min(M2, N1+N2), since at most N1+N2 streams per slot are
            // resolvable across the two receivers. The remainder above the
            // floor is poured into the earliest slots up to the cap.
            let cap = m2.min(n1 + n2);
            let mut omega = vec![b; w1 as usize];
            let mut rem = total - (b as u64 * w1 as u64);
            for o in omega.iter_mut() {
                let add = rem.min((cap - b) as u64) as u32;
                *o += add;
                rem -= add as u64;
            }
            if rem > 0 {
                return Err(SchemeError::Invalid(format!(
                    "omega allocation infeasible for {cfg:?}: {rem} symbols left over"
                )));
            }
            SchemeSpec {
                config: *cfg,
                corner: label.to_string(),
                point,
                w,
                w1,
                w2: w - w1,
                variant: SchemeVariant::S2T9 { eta1: n1 * (n1 - m1), eta2: n1 * m1, omega },
            }
        }
        _ => return Err(err()),
    };
    assert_eq!(spec.dof(), point, "scheme symbol counts disagree with the corner formula for {cfg:?} {label}");
    Ok(spec)
}

/// Both sides of the two counting constraints:
/// (M1'W1 + min(M2',N1)W2, N1W, M2'W2 + min(M1',N2)W1, N2W),
/// with the effective (possibly reduced) antenna counts.
pub fn count_constraints(spec: &SchemeSpec) -> (u64, u64, u64, u64) {
    let (n1, n2) = (spec.config.n1() as u64, spec.config.n2() as u64);
    let (m1e, m2e) = (spec.m1_eff() as u64, spec.m2_eff() as u64);
    let (w, w1, w2) = (spec.w as u64, spec.w1 as u64, spec.w2 as u64);
    (
        m1e * w1 + m2e.min(n1) * w2,
        n1 * w,
        m2e * w2 + m1e.min(n2) * w1,
        n2 * w,
    )
}

/// Closed-form rank accounting for one receiver of a generic-like scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankTerms {
    pub r1: u64,
    pub r2: u64,
    pub r3: u64,
    /// User with the longer phase one (ties resolved as 2).
    pub i_max: usize,
    pub i_min: usize,
    /// Own symbols plus effective cross-interference terms at this receiver.
    pub unknowns: u64,
    /// min(unknowns, r1 + r2 + r3).
    pub predicted_rank: u64,
}

/// Maximum flow (Edmonds-Karp) on a small dense graph.
fn max_flow(cap: &mut [Vec<u64>], s: usize, t: usize) -> u64 {
    let n = cap.len();
    let mut flow = 0;
    loop {
        // BFS for a shortest augmenting path.
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck = u64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            cap[parent[v]][v] -= bottleneck;
            cap[v][parent[v]] += bottleneck;
            v = parent[v];
        }
        flow += bottleneck;
    }
}

/// The generic rank of a receiver's system, computed as a max flow. Rows of
/// slot t (capacity N_i) reach, for each transmitter: the slot's fresh
/// column block while that transmitter is in phase one, or its phase-two
/// pool afterwards. The pool of transmitter j carries random combinations
/// of the interference it created during its own phase one, so it drains
/// back into j's phase-one column blocks with per-slot capacity equal to
/// the interference dimension min(N_j-bar, M_j'). Column blocks cap at the
/// number of unknowns they hold. The flow equals the generic rank because
/// every channel and combination block is independently random: each band
/// sum in a naive closed form would count a shared pool once per band,
/// which overpredicts when one transmitter's phase two spans several bands.
///
/// `row_limit` restricts the usable slots to 1..=row_limit so the per-band
/// marginals r1/r2/r3 can be read off nested flows.
fn generic_rank_flow(spec: &SchemeSpec, receiver: usize, row_limit: u64) -> u64 {
    let m = [spec.m1_eff() as u64, spec.m2_eff() as u64];
    let n = [spec.config.n1() as u64, spec.config.n2() as u64];
    let wp = [spec.w1 as usize, spec.w2 as usize];
    let w = spec.w as usize;
    let i = receiver - 1;
    let o = 1 - i;
    // Unknown column blocks: the own transmitter's M_i' symbols per
    // phase-one slot; the cross transmitter's effective signals,
    // min(M_o', N_i) per phase-one slot.
    let block_cap = |j: usize| if j == i { m[i] } else { m[o].min(n[i]) };
    // Node layout: source, w row nodes, wp[0] + wp[1] block nodes, two
    // phase-two pools, sink.
    let rows0 = 1;
    let blocks0 = [rows0 + w, rows0 + w + wp[0]];
    let pool0 = rows0 + w + wp[0] + wp[1];
    let sink = pool0 + 2;
    let mut cap = vec![vec![0u64; sink + 1]; sink + 1];
    for t in 0..w {
        if (t as u64) < row_limit {
            cap[0][rows0 + t] = n[i];
        }
        for j in 0..2 {
            if t < wp[j] {
                cap[rows0 + t][blocks0[j] + t] = m[j];
            } else {
                cap[rows0 + t][pool0 + j] += m[j];
            }
        }
    }
    for j in 0..2 {
        let interference_dim = n[1 - j].min(m[j]);
        for t in 0..wp[j] {
            cap[pool0 + j][blocks0[j] + t] = interference_dim;
            cap[blocks0[j] + t][sink] = block_cap(j);
        }
    }
    max_flow(&mut cap, 0, sink)
}

fn rank_terms_with(spec: &SchemeSpec, receiver: usize, i_max: usize) -> RankTerms {
    let m = [spec.m1_eff() as u64, spec.m2_eff() as u64];
    let n = [spec.config.n1() as u64, spec.config.n2() as u64];
    let wp = [spec.w1 as u64, spec.w2 as u64];
    let w = spec.w as u64;
    let i = receiver - 1;
    let o = 1 - i;
    let a = i_max - 1; // longer phase one
    let (wmax, wmin) = (wp[a], wp[1 - a]);
    // Nested flows give the marginal rank of each band: slots where both
    // transmitters are fresh, where only the longer phase one is fresh, and
    // where both are in phase two.
    let f1 = generic_rank_flow(spec, receiver, wmin);
    let f2 = generic_rank_flow(spec, receiver, wmax);
    let f3 = generic_rank_flow(spec, receiver, w);
    let unknowns = m[i] * wp[i] + m[o].min(n[i]) * wp[o];
    RankTerms {
        r1: f1,
        r2: f2 - f1,
        r3: f3 - f2,
        i_max,
        i_min: 3 - i_max,
        unknowns,
        predicted_rank: f3,
    }
}

/// Evaluate the rank terms for `receiver` (1 or 2). Ties W1 = W2 resolve to
/// i_max = 2; both resolutions are asserted to agree.
pub fn rank_terms(spec: &SchemeSpec, receiver: usize) -> RankTerms {
    assert!(spec.is_generic_like(), "rank terms are defined for generic-like schemes");
    assert!(receiver == 1 || receiver == 2, "receiver must be 1 or 2");
    if spec.w1 == spec.w2 {
        let t2 = rank_terms_with(spec, receiver, 2);
        let t1 = rank_terms_with(spec, receiver, 1);
        assert_eq!(
            (t1.r1, t1.r2, t1.r3, t1.predicted_rank),
            (t2.r1, t2.r2, t2.r3, t2.predicted_rank),
            "tie-break resolutions disagree for {spec:?}"
        );
        t2
    } else if spec.w1 > spec.w2 {
        rank_terms_with(spec, receiver, 1)
    } else {
        rank_terms_with(spec, receiver, 2)
    }
}

/// The rank condition (unknowns resolvable) per receiver.
pub fn rank_condition(spec: &SchemeSpec) -> (bool, bool) {
    let t1 = rank_terms(spec, 1);
    let t2 = rank_terms(spec, 2);
    (
        t1.unknowns <= t1.r1 + t1.r2 + t1.r3,
        t2.unknowns <= t2.r1 + t2.r2 + t2.r3,
    )
}

/// The coefficient matrix one receiver must invert, kept with its block
/// structure: rows split at the two phase boundaries, columns split between
/// own-signal and cross-interference unknowns.
#[derive(Clone, Debug)]
pub struct BlockMatrix<F> {
    pub matrix: Matrix<F>,
    row_splits: (usize, usize),
    col_split: usize,
}

impl<F: Scalar> BlockMatrix<F> {
    /// Extract block (`row_band` in 1..=3, `col_group` in 1..=2). Row bands
    /// are slots [1, Wmin], (Wmin, Wmax], (Wmax, W]; with the convention
    /// W_i <= W_ī the third band has N_i(W - W_ī) rows. Column group 1 holds
    /// the receiver's own symbols, group 2 the cross-interference terms.
    pub fn block(&self, row_band: usize, col_group: usize) -> Matrix<F> {
        let (r0, r1) = match row_band {
            1 => (0, self.row_splits.0),
            2 => (self.row_splits.0, self.row_splits.1),
            3 => (self.row_splits.1, self.matrix.rows()),
            _ => panic!("row band must be 1..=3"),
        };
        let (c0, c1) = match col_group {
            1 => (0, self.col_split),
            2 => (self.col_split, self.matrix.cols()),
            _ => panic!("column group must be 1 or 2"),
        };
        Matrix::from_fn(r1 - r0, c1 - c0, |r, c| self.matrix[(r0 + r, c0 + c)])
    }
}

/// Interference-structure matrix E_i: maps transmitter i's phase-one symbol
/// vector to the min(M_i', N_o)W_i effective interference terms it created
/// at the other receiver.
fn interference_map<F: Scalar>(
    src: &MatrixSource,
    tx: usize,
    m_eff: usize,
    n_other: usize,
    w_phase1: usize,
) -> Matrix<F> {
    let k = m_eff.min(n_other);
    let other_rx = 3 - tx;
    let mut e = Matrix::zeros(k * w_phase1, m_eff * w_phase1);
    for j in 0..w_phase1 {
        let block = if m_eff >= n_other {
            src.channel(other_rx, tx, j + 1, n_other, m_eff)
        } else {
            Matrix::identity(m_eff)
        };
        e.set_block(j * k, j * m_eff, &block);
    }
    e
}

/// Assemble the full coefficient matrix seen by `receiver` for a
/// generic-like scheme, with all randomness drawn from `src`.
pub fn build_coefficient_matrix<F: Scalar>(
    spec: &SchemeSpec,
    receiver: usize,
    src: &MatrixSource,
) -> Result<BlockMatrix<F>, SchemeError> {
    if !spec.is_generic_like() {
        return Err(SchemeError::Invalid(format!(
            "coefficient matrix is defined for generic-like schemes, not {:?}",
            spec.variant
        )));
    }
    if receiver != 1 && receiver != 2 {
        return Err(SchemeError::Invalid(format!("receiver must be 1 or 2, got {receiver}")));
    }
    let m = [spec.m1_eff() as usize, spec.m2_eff() as usize];
    let n = [spec.config.n1() as usize, spec.config.n2() as usize];
    let wp = [spec.w1 as usize, spec.w2 as usize];
    let w = spec.w as usize;
    let i = receiver - 1;
    let o = 1 - i;
    let (ni, mi, mo) = (n[i], m[i], m[o]);
    let (wi, wo) = (wp[i], wp[o]);
    let own_cols = mi * wi;
    let q = mo.min(ni) * wo;
    let mut p = Matrix::zeros(ni * w, own_cols + q);
    let e_own: Matrix<F> = interference_map(src, i + 1, mi, n[o], wi);
    for t in 1..=w {
        let r0 = (t - 1) * ni;
        let h_own: Matrix<F> = src.channel(i + 1, i + 1, t, ni, mi);
        if t <= wi {
            p.set_block(r0, (t - 1) * mi, &h_own);
        } else {
            // x_i(t) = C_i(t) * (interference terms) with C_i random: the
            // combination depends only on delayed own-link channels via E_i.
            let c: Matrix<F> = src.combo(i + 1, t, mi, e_own.rows());
            p.set_block(r0, 0, &h_own.matmul(&c).matmul(&e_own));
        }
        let h_cross: Matrix<F> = src.channel(i + 1, o + 1, t, ni, mo);
        if t <= wo {
            if mo >= ni {
                // Unknowns are the received interference vectors themselves.
                p.set_block(r0, own_cols + (t - 1) * ni, &Matrix::identity(ni));
            } else {
                p.set_block(r0, own_cols + (t - 1) * mo, &h_cross);
            }
        } else {
            let c: Matrix<F> = src.combo(o + 1, t, mo, q);
            p.set_block(r0, own_cols, &h_cross.matmul(&c));
        }
    }
    let wmin = wi.min(wo);
    let wmax = wi.max(wo);
    Ok(BlockMatrix {
        matrix: p,
        row_splits: (ni * wmin, ni * wmax),
        col_split: own_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;

    fn cfg(m1: u32, m2: u32, n1: u32, n2: u32) -> AntennaConfig {
        AntennaConfig::normalize(m1, m2, n1, n2).unwrap()
    }

    #[test]
    fn corner_parameters_frozen() {
        let s = corner_scheme(&cfg(3, 5, 2, 3), "Q3").unwrap();
        assert_eq!((s.w, s.w1, s.w2), (9, 4, 3));
        let s = corner_scheme(&cfg(2, 2, 1, 1), "P3").unwrap();
        assert_eq!((s.w, s.w1, s.w2), (3, 1, 1));
        assert_eq!(s.dof(), DofPoint::new(Rat::new(2, 3), Rat::new(2, 3)));
        let s = corner_scheme(&cfg(2, 6, 3, 4), "T9").unwrap();
        assert_eq!((s.w, s.w1, s.w2), (5, 2, 3));
        match &s.variant {
            SchemeVariant::S2T9 { eta1, eta2, omega } => {
                assert_eq!((*eta1, *eta2), (3, 6));
                assert_eq!(omega, &vec![6, 5]);
                assert_eq!(omega.iter().sum::<u32>(), 11);
            }
            v => panic!("unexpected variant {v:?}"),
        }
        let s = corner_scheme(&cfg(2, 6, 3, 4), "T7").unwrap();
        assert_eq!((s.w, s.w1, s.w2), (3, 3, 1));
        assert_eq!(s.variant, SchemeVariant::ReducedTx2 { m2_eff: 5 });
        assert_eq!(s.dof(), DofPoint::new(Rat::new(2, 1), Rat::new(5, 3)));
        let s = corner_scheme(&cfg(3, 7, 4, 5), "T8").unwrap();
        assert_eq!((s.w, s.w1), (3, 1));
        assert_eq!(s.variant, SchemeVariant::S1T8 { mu1: 2, mu2: 6 });
    }

    #[test]
    fn unknown_corner_errors_name_valid_ones() {
        let err = corner_scheme(&cfg(3, 5, 2, 3), "T9").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Q3"), "{msg}");
        assert!(corner_scheme(&cfg(1, 1, 1, 1), "Q3").is_err());
        // Degenerate N1 = N2 in folded C63: T5 collapses onto the d1 axis.
        let c = cfg(2, 5, 2, 2);
        assert_eq!(c.classify(), ConfigClass::C63);
        assert!(corner_scheme(&c, "T5").is_err());
        assert!(corner_scheme(&c, "T6").is_err()); // T6 = (M1, 0) degenerate too
    }

    #[test]
    fn counting_constraints_examples() {
        let s = SchemeSpec::generic(cfg(2, 6, 3, 4), 3, 3, 1);
        assert_eq!(count_constraints(&s), (9, 9, 12, 12));
        let s = SchemeSpec::generic(cfg(2, 2, 1, 1), 3, 1, 1);
        assert_eq!(count_constraints(&s), (3, 3, 3, 3));
        // W1 = W with M1' > N1 always violates the first constraint.
        let s = SchemeSpec::generic(cfg(3, 5, 2, 3), 4, 4, 1);
        let (lhs1, rhs1, _, _) = count_constraints(&s);
        assert!(lhs1 > rhs1);
    }

    #[test]
    fn rank_terms_examples() {
        let s = SchemeSpec::generic(cfg(2, 2, 1, 1), 3, 1, 1);
        let t = rank_terms(&s, 1);
        assert_eq!((t.r1, t.r2, t.r3), (1, 0, 2));
        assert_eq!(t.predicted_rank, 3);
        assert_eq!(t.unknowns, 3);
        let s = SchemeSpec::generic(cfg(2, 6, 3, 4), 3, 3, 1);
        let t = rank_terms(&s, 2);
        assert_eq!(t.unknowns, 12);
        assert_eq!(t.predicted_rank, 11);
        assert_eq!(rank_condition(&s), (true, false));
    }

    #[test]
    fn relabel_symmetry() {
        // Evaluating receiver 2 of (cfg, w1, w2) must match receiver 1 of the
        // user-swapped configuration with phases swapped.
        for (c, w, w1, w2) in [
            (cfg(2, 6, 3, 4), 3, 3, 1),
            (cfg(3, 5, 2, 3), 9, 4, 3),
            (cfg(2, 3, 2, 4), 4, 2, 3),
        ] {
            let s = SchemeSpec::generic(c, w, w1, w2);
            let swapped = AntennaConfig::normalize(c.m2(), c.m1(), c.n2(), c.n1()).unwrap();
            // Only valid when normalization keeps the swapped order (N1 >= N2
            // after swap is re-sorted); pick configs where n2 >= n1 swap is a
            // real relabel, i.e. compare against a manually built spec.
            if swapped.m1() == c.m2() && swapped.n1() == c.n2() {
                let ss = SchemeSpec::generic(swapped, w, w2, w1);
                let a = rank_terms(&s, 2);
                let b = rank_terms(&ss, 1);
                assert_eq!((a.r1, a.r2, a.r3, a.predicted_rank), (b.r1, b.r2, b.r3, b.predicted_rank));
            }
        }
    }

    #[test]
    fn corner_schemes_satisfy_counting_and_rank_conditions() {
        for m1 in 1..=6u32 {
            for m2 in 1..=6u32 {
                for n1 in 1..=6u32 {
                    for n2 in 1..=6u32 {
                        let c = cfg(m1, m2, n1, n2);
                        for label in scheme_labels(c.classify()) {
                            let Ok(s) = corner_scheme(&c, label) else { continue };
                            assert_eq!(s.dof(), corner_formula(&c, label).unwrap(), "{c:?} {label}");
                            if s.is_generic_like() {
                                let (l1, r1, l2, r2) = count_constraints(&s);
                                assert!(l1 <= r1 && l2 <= r2, "{c:?} {label}: counting fails");
                                assert_eq!(rank_condition(&s), (true, true), "{c:?} {label}");
                            }
                            if matches!(c.classify(), ConfigClass::C3 | ConfigClass::C4)
                                && (label == "Q3" || label == "P3")
                            {
                                let (l1, r1, l2, r2) = count_constraints(&s);
                                assert_eq!((l1, l2), (r1, r2), "{c:?} {label}: expected equality");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coefficient_matrix_shapes_and_ranks() {
        let src = MatrixSource::new(17);
        let s = SchemeSpec::generic(cfg(2, 2, 1, 1), 3, 1, 1);
        let p: BlockMatrix<Fp> = build_coefficient_matrix(&s, 1, &src).unwrap();
        assert_eq!((p.matrix.rows(), p.matrix.cols()), (3, 3));
        assert_eq!(p.matrix.rank(), 3);
        let s = SchemeSpec::generic(cfg(2, 6, 3, 4), 3, 3, 1);
        let p: BlockMatrix<Fp> = build_coefficient_matrix(&s, 2, &src).unwrap();
        assert_eq!((p.matrix.rows(), p.matrix.cols()), (12, 12));
        assert_eq!(p.matrix.rank(), 11);
        // Block dimensions: receiver 2, Wmin = 1, Wmax = 3 -> bands of 1, 2,
        // 0 slots with N2 = 4 rows each; column split at M2'W2 = 6.
        assert_eq!(p.block(1, 1).rows(), 4);
        assert_eq!(p.block(2, 2).rows(), 8);
        assert_eq!(p.block(3, 2).rows(), 0);
        assert_eq!(p.block(1, 1).cols(), 6);
        assert_eq!(p.block(1, 2).cols(), 6);
        // Determinism.
        let q: BlockMatrix<Fp> = build_coefficient_matrix(&s, 2, &src).unwrap();
        assert_eq!(p.matrix, q.matrix);
    }
}

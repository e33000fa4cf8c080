//! End-to-end noiseless replay of the schemes: draw channels and symbols,
//! transmit per phase, assemble each receiver's linear system, solve it
//! exactly, and verify recovery of every intended symbol and interference
//! term. Includes the special S1/S2 corner schemes and the K-user MISO
//! scheme, plus Monte-Carlo aggregation.
//!
//! Delayed local CSIT is enforced structurally: all transmitter-side signal
//! construction goes through [`TxContext`], which can only produce the
//! transmitter's own outgoing channel matrices and its own combination
//! streams — other transmitters' channels are unrepresentable there.

use num_traits::Zero;
use serde_json::json;

use crate::config::MisoConfig;
use crate::field::Scalar;
use crate::geometry::{rat_str, DofPoint};
use crate::linalg::Matrix;
use crate::schemes::{build_coefficient_matrix, rank_terms, SchemeSpec, SchemeVariant};
use crate::streams::MatrixSource;
use crate::{PrimeField, Rat};

/// Transmitter-side view of the world: own outgoing channels (available
/// with one slot of delay) and own private randomness, nothing else.
pub struct TxContext<'a> {
    src: &'a MatrixSource,
    tx: usize,
}

impl<'a> TxContext<'a> {
    pub fn new(src: &'a MatrixSource, tx: usize) -> Self {
        TxContext { src, tx }
    }

    /// Channel from this transmitter to `rx` in a past slot.
    pub fn outgoing<F: Scalar>(&self, rx: usize, t: usize, rows: usize, cols: usize) -> Matrix<F> {
        self.src.channel(rx, self.tx, t, rows, cols)
    }

    /// Private random combination matrix for slot `t`.
    pub fn combo<F: Scalar>(&self, t: usize, rows: usize, cols: usize) -> Matrix<F> {
        self.src.combo(self.tx, t, rows, cols)
    }
}

/// Everything that went over the air in one trial.
#[derive(Clone, Debug)]
pub struct Transcript<F> {
    /// Information symbols per user.
    pub u: [Vec<F>; 2],
    /// Transmitted vectors per transmitter, per slot (1-based slots at
    /// index t-1).
    pub x: [Vec<Vec<F>>; 2],
    /// Received vectors per receiver, per slot.
    pub y: [Vec<Vec<F>>; 2],
    /// Effective interference terms created by each transmitter at its
    /// non-intended receiver during phase one (the phase-two payload).
    pub interference: [Vec<F>; 2],
}

/// Per-receiver outcome of one trial.
#[derive(Clone, Debug)]
pub struct ReceiverReport {
    pub equations: usize,
    pub unknowns: usize,
    pub achieved_rank: usize,
    /// Closed-form prediction, where the rank calculus applies.
    pub predicted_rank: Option<u64>,
    pub decoded: bool,
    /// True when the closed-form prediction and the realized system
    /// disagree about decodability — a falsification signal, never retried.
    pub discrepancy: bool,
}

/// One trial of a two-user scheme.
#[derive(Clone, Debug)]
pub struct TrialReport {
    pub seed: u64,
    pub class: &'static str,
    pub corner: String,
    pub w: u32,
    pub w1: u32,
    pub w2: u32,
    pub receivers: [ReceiverReport; 2],
    /// Exact achieved DoF pair; present iff both receivers decoded.
    pub dof: Option<DofPoint>,
}

impl TrialReport {
    pub fn csv_header() -> &'static str {
        "seed,class,corner,w,w1,w2,rank1,rank2,decoded1,decoded2,d1,d2"
    }

    pub fn csv_row(&self) -> String {
        let (d1, d2) = match &self.dof {
            Some(p) => (rat_str(p.d1), rat_str(p.d2)),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.class,
            self.corner,
            self.w,
            self.w1,
            self.w2,
            self.receivers[0].achieved_rank,
            self.receivers[1].achieved_rank,
            self.receivers[0].decoded,
            self.receivers[1].decoded,
            d1,
            d2
        )
    }
}

fn stack<F: Scalar>(slots: &[Vec<F>]) -> Vec<F> {
    slots.iter().flatten().copied().collect()
}

/// Place `h * c` into `dst` at `(r0, c0)`.
fn put_product<F: Scalar>(dst: &mut Matrix<F>, r0: usize, c0: usize, h: &Matrix<F>, c: &Matrix<F>) {
    dst.set_block(r0, c0, &h.matmul(c));
}

/// Generic-scheme phase-one/phase-two signals for one transmitter: fresh
/// symbols per slot during phase one, then random combinations of the
/// interference terms this transmitter created at the other receiver.
fn transmit_generic<F: Scalar>(
    ctx: &TxContext,
    m_eff: usize,
    n_other: usize,
    other_rx: usize,
    w: usize,
    w_phase1: usize,
    symbols: &[F],
) -> (Vec<Vec<F>>, Vec<F>) {
    assert_eq!(symbols.len(), m_eff * w_phase1);
    let k = m_eff.min(n_other);
    let mut interference: Vec<F> = Vec::with_capacity(k * w_phase1);
    for j in 1..=w_phase1 {
        let slot = &symbols[(j - 1) * m_eff..j * m_eff];
        if m_eff >= n_other {
            let h: Matrix<F> = ctx.outgoing(other_rx, j, n_other, m_eff);
            interference.extend(h.mul_vec(slot));
        } else {
            interference.extend_from_slice(slot);
        }
    }
    let mut x = Vec::with_capacity(w);
    for t in 1..=w {
        if t <= w_phase1 {
            x.push(symbols[(t - 1) * m_eff..t * m_eff].to_vec());
        } else {
            let c: Matrix<F> = ctx.combo(t, m_eff, interference.len());
            x.push(c.mul_vec(&interference));
        }
    }
    (x, interference)
}

fn receive<F: Scalar>(
    src: &MatrixSource,
    n: [usize; 2],
    m_eff: [usize; 2],
    w: usize,
    x: &[Vec<Vec<F>>; 2],
) -> [Vec<Vec<F>>; 2] {
    let mut y: [Vec<Vec<F>>; 2] = [Vec::with_capacity(w), Vec::with_capacity(w)];
    for (rx, yk) in y.iter_mut().enumerate() {
        for t in 1..=w {
            let mut acc = vec![F::zero(); n[rx]];
            for tx in 0..2 {
                let h: Matrix<F> = src.channel(rx + 1, tx + 1, t, n[rx], m_eff[tx]);
                for (a, b) in acc.iter_mut().zip(h.mul_vec(&x[tx][t - 1])) {
                    *a = *a + b;
                }
            }
            yk.push(acc);
        }
    }
    y
}

/// Produce the full transcript of one trial for any two-user scheme variant.
pub fn transcript<F: Scalar>(spec: &SchemeSpec, src: &MatrixSource) -> Transcript<F> {
    let n = [spec.config.n1() as usize, spec.config.n2() as usize];
    let m_eff = [spec.m1_eff() as usize, spec.m2_eff() as usize];
    let w = spec.w as usize;
    match &spec.variant {
        SchemeVariant::Generic | SchemeVariant::ReducedTx2 { .. } => {
            let wp = [spec.w1 as usize, spec.w2 as usize];
            let u = [
                src.symbols::<F>(1, m_eff[0] * wp[0]),
                src.symbols::<F>(2, m_eff[1] * wp[1]),
            ];
            let (x1, i1) =
                transmit_generic(&TxContext::new(src, 1), m_eff[0], n[1], 2, w, wp[0], &u[0]);
            let (x2, i2) =
                transmit_generic(&TxContext::new(src, 2), m_eff[1], n[0], 1, w, wp[1], &u[1]);
            let x = [x1, x2];
            let y = receive(src, n, m_eff, w, &x);
            Transcript { u, x, y, interference: [i1, i2] }
        }
        _ => special_transcript(spec, src),
    }
}

/// Layout of the special S1/S2 corner schemes: transmitter one sends two
/// pooled symbol groups (phase one / phase two); transmitter two sends
/// fresh symbols during phase one (pooled across the phase, or per-slot for
/// T9) and retransmits combinations of the N1·W1 interference terms it
/// created at receiver one during phase two.
struct SpecialLayout {
    pool1: usize,
    pool2: usize,
    /// Symbols of user two introduced in each phase-one slot; empty slice
    /// semantics: pooled across the whole phase (T5/T8).
    tx2_per_slot: Option<Vec<usize>>,
    tx2_total: usize,
    staged_rx2: bool,
}

fn special_layout(spec: &SchemeSpec) -> SpecialLayout {
    let m2 = spec.config.m2() as usize;
    let w1 = spec.w1 as usize;
    match &spec.variant {
        SchemeVariant::S1T5 { nu1, nu2, .. } => SpecialLayout {
            pool1: *nu1 as usize,
            pool2: *nu2 as usize,
            tx2_per_slot: None,
            tx2_total: m2 * w1,
            staged_rx2: false,
        },
        SchemeVariant::S1T8 { mu1, mu2 } => SpecialLayout {
            pool1: *mu1 as usize,
            pool2: *mu2 as usize,
            tx2_per_slot: None,
            tx2_total: m2 * w1,
            staged_rx2: true,
        },
        SchemeVariant::S2T9 { eta1, eta2, omega } => {
            let per_slot: Vec<usize> = omega.iter().map(|&o| o as usize).collect();
            SpecialLayout {
                pool1: *eta1 as usize,
                pool2: *eta2 as usize,
                tx2_total: per_slot.iter().sum(),
                tx2_per_slot: Some(per_slot),
                staged_rx2: true,
            }
        }
        v => panic!("not a special variant: {v:?}"),
    }
}

/// Transmitter two's phase-one mixing matrix B(t) and the column range of
/// the symbols it carries.
fn tx2_phase1_map<F: Scalar>(
    ctx: &TxContext,
    layout: &SpecialLayout,
    m2: usize,
    t: usize,
) -> (Matrix<F>, usize, usize) {
    match &layout.tx2_per_slot {
        None => (ctx.combo(t, m2, layout.tx2_total), 0, layout.tx2_total),
        Some(per_slot) => {
            let start: usize = per_slot[..t - 1].iter().sum();
            let len = per_slot[t - 1];
            (ctx.combo(t, m2, len), start, start + len)
        }
    }
}

fn special_transcript<F: Scalar>(spec: &SchemeSpec, src: &MatrixSource) -> Transcript<F> {
    let layout = special_layout(spec);
    let n = [spec.config.n1() as usize, spec.config.n2() as usize];
    let (m1, m2) = (spec.config.m1() as usize, spec.config.m2() as usize);
    let (w, w1) = (spec.w as usize, spec.w1 as usize);
    let u1 = src.symbols::<F>(1, layout.pool1 + layout.pool2);
    let u2 = src.symbols::<F>(2, layout.tx2_total);
    let (p1, p2) = u1.split_at(layout.pool1);
    let tx1 = TxContext::new(src, 1);
    let tx2 = TxContext::new(src, 2);

    // Transmitter two, phase one; record the interference J at receiver one
    // from its own (delayed) outgoing channel.
    let mut x2: Vec<Vec<F>> = Vec::with_capacity(w);
    let mut j_terms: Vec<F> = Vec::with_capacity(n[0] * w1);
    for t in 1..=w1 {
        let (b, s0, s1) = tx2_phase1_map::<F>(&tx2, &layout, m2, t);
        let xt = b.mul_vec(&u2[s0..s1]);
        let h: Matrix<F> = tx2.outgoing(1, t, n[0], m2);
        j_terms.extend(h.mul_vec(&xt));
        x2.push(xt);
    }
    // Phase two: combinations of J.
    for t in w1 + 1..=w {
        let d: Matrix<F> = tx2.combo(t, m2, j_terms.len());
        x2.push(d.mul_vec(&j_terms));
    }

    // Transmitter one: pooled random combinations per phase.
    let mut x1: Vec<Vec<F>> = Vec::with_capacity(w);
    for t in 1..=w {
        let (pool, cols) = if t <= w1 { (p1, layout.pool1) } else { (p2, layout.pool2) };
        let a: Matrix<F> = tx1.combo(t, m1, cols);
        x1.push(a.mul_vec(pool));
    }

    let x = [x1, x2];
    let y = receive(src, n, [m1, m2], w, &x);
    Transcript { u: [u1, u2], x, y, interference: [Vec::new(), j_terms] }
}

fn receiver_report(
    p: &Matrix<PrimeField>,
    rhs: &[PrimeField],
    truth: &[PrimeField],
    predicted: Option<u64>,
) -> (ReceiverReport, bool) {
    let out = p.solve(rhs);
    let decoded = out.solution.is_some();
    if let Some(sol) = &out.solution {
        assert_eq!(sol, truth, "unique solution must equal the transmitted truth");
    }
    let discrepancy = predicted.is_some_and(|pr| (pr as usize == p.cols()) != decoded);
    (
        ReceiverReport {
            equations: p.rows(),
            unknowns: p.cols(),
            achieved_rank: out.rank,
            predicted_rank: predicted,
            decoded,
            discrepancy,
        },
        decoded,
    )
}

fn finish_report(spec: &SchemeSpec, seed: u64, receivers: [ReceiverReport; 2]) -> TrialReport {
    let both = receivers[0].decoded && receivers[1].decoded;
    TrialReport {
        seed,
        class: spec.config.classify().label(),
        corner: spec.corner.clone(),
        w: spec.w,
        w1: spec.w1,
        w2: spec.w2,
        receivers,
        dof: both.then(|| spec.dof()),
    }
}

/// One trial of a generic-like scheme over the prime field.
pub fn run_generic(spec: &SchemeSpec, seed: u64) -> TrialReport {
    assert!(spec.is_generic_like(), "run_generic needs a generic-like spec");
    let src = MatrixSource::new(seed);
    let tr: Transcript<PrimeField> = transcript(spec, &src);
    let mut reports: Vec<ReceiverReport> = Vec::with_capacity(2);
    for rx in 1..=2usize {
        let p = build_coefficient_matrix::<PrimeField>(spec, rx, &src).unwrap();
        let rhs = stack(&tr.y[rx - 1]);
        let truth: Vec<PrimeField> = tr.u[rx - 1]
            .iter()
            .chain(&tr.interference[2 - rx])
            .copied()
            .collect();
        let predicted = Some(rank_terms(spec, rx).predicted_rank);
        let (rep, _) = receiver_report(&p.matrix, &rhs, &truth, predicted);
        reports.push(rep);
    }
    finish_report(spec, seed, [reports.remove(0), reports.remove(0)])
}

/// Columns of the receiver systems for the special schemes.
struct SpecialSystems {
    rx1: Matrix<PrimeField>,
    rx2: Matrix<PrimeField>,
    /// Stacked map from user-two symbols to the interference terms J.
    j_map: Matrix<PrimeField>,
}

fn special_systems(spec: &SchemeSpec, src: &MatrixSource) -> SpecialSystems {
    let layout = special_layout(spec);
    let n = [spec.config.n1() as usize, spec.config.n2() as usize];
    let (m1, m2) = (spec.config.m1() as usize, spec.config.m2() as usize);
    let (w, w1) = (spec.w as usize, spec.w1 as usize);
    let (pool1, pool2, total2) = (layout.pool1, layout.pool2, layout.tx2_total);
    let nj = n[0] * w1;
    let tx1 = TxContext::new(src, 1);
    let tx2 = TxContext::new(src, 2);

    let mut j_map = Matrix::zeros(nj, total2);
    for t in 1..=w1 {
        let (b, s0, _) = tx2_phase1_map::<PrimeField>(&tx2, &layout, m2, t);
        let h12: Matrix<PrimeField> = src.channel(1, 2, t, n[0], m2);
        put_product(&mut j_map, (t - 1) * n[0], s0, &h12, &b);
    }

    // Receiver one: unknowns [pool1 | pool2 | J].
    let mut rx1 = Matrix::zeros(n[0] * w, pool1 + pool2 + nj);
    // Receiver two: unknowns [pool1 | pool2 | u2].
    let mut rx2 = Matrix::zeros(n[1] * w, pool1 + pool2 + total2);
    for t in 1..=w {
        let r1 = (t - 1) * n[0];
        let r2 = (t - 1) * n[1];
        let h11: Matrix<PrimeField> = src.channel(1, 1, t, n[0], m1);
        let h21: Matrix<PrimeField> = src.channel(2, 1, t, n[1], m1);
        if t <= w1 {
            let a1: Matrix<PrimeField> = tx1.combo(t, m1, pool1);
            put_product(&mut rx1, r1, 0, &h11, &a1);
            put_product(&mut rx2, r2, 0, &h21, &a1);
            rx1.set_block(r1, pool1 + pool2 + (t - 1) * n[0], &Matrix::identity(n[0]));
            let (b, s0, _) = tx2_phase1_map::<PrimeField>(&tx2, &layout, m2, t);
            let h22: Matrix<PrimeField> = src.channel(2, 2, t, n[1], m2);
            put_product(&mut rx2, r2, pool1 + pool2 + s0, &h22, &b);
        } else {
            let a2: Matrix<PrimeField> = tx1.combo(t, m1, pool2);
            put_product(&mut rx1, r1, pool1, &h11, &a2);
            put_product(&mut rx2, r2, pool1, &h21, &a2);
            let d: Matrix<PrimeField> = tx2.combo(t, m2, nj);
            let h12: Matrix<PrimeField> = src.channel(1, 2, t, n[0], m2);
            let h22: Matrix<PrimeField> = src.channel(2, 2, t, n[1], m2);
            rx1.set_block(r1, pool1 + pool2, &h12.matmul(&d));
            rx2.set_block(r2, pool1 + pool2, &h22.matmul(&d).matmul(&j_map));
        }
    }
    SpecialSystems { rx1, rx2, j_map }
}

/// Receiver two's staged decode for T8/T9: first the phase-two slots resolve
/// the phase-two pool and the interference terms, then the phase-one slots
/// plus the now-known interference resolve the phase-one pool and user two's
/// symbols. Returns the recovered unknown vector [pool1 | pool2 | u2].
fn staged_rx2_solve(
    spec: &SchemeSpec,
    src: &MatrixSource,
    sys: &SpecialSystems,
    y2: &[Vec<PrimeField>],
) -> Option<Vec<PrimeField>> {
    let layout = special_layout(spec);
    let n = [spec.config.n1() as usize, spec.config.n2() as usize];
    let (w, w1) = (spec.w as usize, spec.w1 as usize);
    let (pool1, pool2, total2) = (layout.pool1, layout.pool2, layout.tx2_total);
    let nj = n[0] * w1;

    // Stage 1: slots w1+1..w, unknowns [pool2 | J].
    let rows1 = (w - w1) * n[1];
    let mut s1 = Matrix::zeros(rows1, pool2 + nj);
    let mut rhs1 = Vec::with_capacity(rows1);
    for t in w1 + 1..=w {
        let r = (t - w1 - 1) * n[1];
        for c in 0..pool2 {
            for rr in 0..n[1] {
                s1[(r + rr, c)] = sys.rx2[((t - 1) * n[1] + rr, pool1 + c)];
            }
        }
        let d: Matrix<PrimeField> = src.combo(2, t, spec.config.m2() as usize, nj);
        let h22: Matrix<PrimeField> = src.channel(2, 2, t, n[1], spec.config.m2() as usize);
        s1.set_block(r, pool2, &h22.matmul(&d));
        rhs1.extend_from_slice(&y2[t - 1]);
    }
    let stage1 = s1.solve(&rhs1).solution?;
    let (p2_hat, j_hat) = stage1.split_at(pool2);

    // Stage 2: phase-one slots plus the definition of J, unknowns
    // [pool1 | u2].
    let rows2 = w1 * n[1] + nj;
    let mut s2 = Matrix::zeros(rows2, pool1 + total2);
    let mut rhs2 = Vec::with_capacity(rows2);
    for t in 1..=w1 {
        let r = (t - 1) * n[1];
        for c in 0..pool1 {
            for rr in 0..n[1] {
                s2[(r + rr, c)] = sys.rx2[((t - 1) * n[1] + rr, c)];
            }
        }
        for c in 0..total2 {
            for rr in 0..n[1] {
                s2[(r + rr, pool1 + c)] = sys.rx2[((t - 1) * n[1] + rr, pool1 + pool2 + c)];
            }
        }
        rhs2.extend_from_slice(&y2[t - 1]);
    }
    for r in 0..nj {
        for c in 0..total2 {
            s2[(w1 * n[1] + r, pool1 + c)] = sys.j_map[(r, c)];
        }
    }
    rhs2.extend_from_slice(j_hat);
    let stage2 = s2.solve(&rhs2).solution?;
    let (p1_hat, u2_hat) = stage2.split_at(pool1);

    let mut full = Vec::with_capacity(pool1 + pool2 + total2);
    full.extend_from_slice(p1_hat);
    full.extend_from_slice(p2_hat);
    full.extend_from_slice(u2_hat);
    Some(full)
}

fn run_special(spec: &SchemeSpec, seed: u64) -> TrialReport {
    let layout = special_layout(spec);
    let src = MatrixSource::new(seed);
    let tr: Transcript<PrimeField> = transcript(spec, &src);
    let sys = special_systems(spec, &src);

    let rhs1 = stack(&tr.y[0]);
    let truth1: Vec<PrimeField> = tr.u[0].iter().chain(&tr.interference[1]).copied().collect();
    let (rep1, _) = receiver_report(&sys.rx1, &rhs1, &truth1, None);

    let rhs2 = stack(&tr.y[1]);
    let truth2: Vec<PrimeField> = tr.u[0].iter().chain(&tr.u[1]).copied().collect();
    let (rep2, decoded2) = receiver_report(&sys.rx2, &rhs2, &truth2, None);

    if layout.staged_rx2 {
        let staged = staged_rx2_solve(spec, &src, &sys, &tr.y[1]);
        assert_eq!(
            staged.is_some(),
            decoded2,
            "staged and joint decodability disagree for {spec:?} seed {seed}"
        );
        if let Some(st) = staged {
            assert_eq!(st, truth2, "staged decode must match the joint solution");
        }
    }

    finish_report(spec, seed, [rep1, rep2])
}

/// One trial of any two-user scheme.
pub fn run_scheme(spec: &SchemeSpec, seed: u64) -> TrialReport {
    if spec.is_generic_like() {
        run_generic(spec, seed)
    } else {
        run_special(spec, seed)
    }
}

/// One trial of the corner T5 scheme of class S1 (joint decoding only).
pub fn run_s1_t5(spec: &SchemeSpec, seed: u64) -> TrialReport {
    assert!(matches!(spec.variant, SchemeVariant::S1T5 { .. }));
    run_special(spec, seed)
}

/// One trial of the corner T8 scheme of class S1 (staged decoding checked
/// against the joint solve).
pub fn run_s1_t8(spec: &SchemeSpec, seed: u64) -> TrialReport {
    assert!(matches!(spec.variant, SchemeVariant::S1T8 { .. }));
    run_special(spec, seed)
}

/// One trial of the corner T9 scheme of class S2 (staged decoding checked
/// against the joint solve).
pub fn run_s2_t9(spec: &SchemeSpec, seed: u64) -> TrialReport {
    assert!(matches!(spec.variant, SchemeVariant::S2T9 { .. }));
    run_special(spec, seed)
}

/// SVD rank of the float-valued coefficient matrix — conditioning
/// diagnostic only; decode-rate claims always use the prime field.
pub fn float_rank_diagnostic(spec: &SchemeSpec, receiver: usize, seed: u64) -> (usize, u64) {
    let src = MatrixSource::new(seed);
    let p = build_coefficient_matrix::<f64>(spec, receiver, &src).unwrap();
    (crate::linalg::svd_rank(&p.matrix), rank_terms(spec, receiver).predicted_rank)
}

/// One trial of the K-user MISO interference-channel scheme.
#[derive(Clone, Debug)]
pub struct MisoTrialReport {
    pub seed: u64,
    pub k: usize,
    pub receivers: Vec<ReceiverReport>,
    /// K²/(K²−K+1) when every receiver decoded.
    pub sum_dof: Option<Rat>,
}

pub fn run_miso(mc: &MisoConfig, seed: u64) -> MisoTrialReport {
    let k = mc.k as usize;
    let src = MatrixSource::new(seed);
    // Each transmitter uses K of its M antennas; phase one is one slot in
    // which transmitter j sends its K symbols uncoded on those antennas.
    let u: Vec<Vec<PrimeField>> = (1..=k).map(|j| src.symbols(j, k)).collect();
    // h[rx][tx] = channel row vector in the single phase-one slot.
    let h: Vec<Vec<Matrix<PrimeField>>> = (1..=k)
        .map(|rx| (1..=k).map(|tx| src.channel(rx, tx, 1, 1, k)).collect())
        .collect();
    // y[rx] in phase one.
    let y1: Vec<PrimeField> = (0..k)
        .map(|rx| {
            (0..k).fold(PrimeField::new(0), |acc, tx| acc + h[rx][tx].mul_vec(&u[tx])[0])
        })
        .collect();
    // Phase two: transmitter j re-sends, on a single antenna in its own
    // slots, the K-1 interference scalars h[k',j](1)·u_j it created. Every
    // receiver hears each scalar through a known scalar channel, so all
    // interference terms become common knowledge unless some scalar channel
    // coefficient happens to be zero.
    let mut slot = 1usize;
    let mut all_known = true;
    for tx in 0..k {
        for rx_other in (0..k).filter(|&r| r != tx) {
            slot += 1;
            for rx in 0..k {
                let g: Matrix<PrimeField> = src.channel(rx + 1, tx + 1, slot, 1, 1);
                if g[(0, 0)].is_zero() {
                    all_known = false;
                }
            }
            let _ = rx_other;
        }
    }
    let w = k * k - k + 1;
    assert_eq!(slot, w);
    let mut receivers = Vec::with_capacity(k);
    let mut all_decoded = all_known;
    for rx in 0..k {
        // K x K system: phase-one row h[rx][rx] (after interference
        // cancellation) plus the K-1 broadcast interference rows h[r'][rx].
        let mut a = Matrix::zeros(k, k);
        let mut rhs = Vec::with_capacity(k);
        a.set_block(0, 0, &h[rx][rx]);
        let own_interf: PrimeField = (0..k)
            .filter(|&tx| tx != rx)
            .fold(PrimeField::new(0), |acc, tx| acc + h[rx][tx].mul_vec(&u[tx])[0]);
        rhs.push(y1[rx] - own_interf);
        for (i, r_other) in (0..k).filter(|&r| r != rx).enumerate() {
            a.set_block(i + 1, 0, &h[r_other][rx]);
            rhs.push(h[r_other][rx].mul_vec(&u[rx])[0]);
        }
        let out = a.solve(&rhs);
        let decoded = all_known && out.solution.is_some();
        if let Some(sol) = &out.solution {
            assert_eq!(sol, &u[rx]);
        }
        all_decoded &= decoded;
        receivers.push(ReceiverReport {
            equations: k,
            unknowns: k,
            achieved_rank: out.rank,
            predicted_rank: Some(k as u64),
            decoded,
            discrepancy: !decoded,
        });
    }
    MisoTrialReport {
        seed,
        k,
        receivers,
        sum_dof: all_decoded.then(|| Rat::new((k * k) as i64, w as i64)),
    }
}

/// Aggregate over independent seeds.
#[derive(Clone, Debug)]
pub struct AggregateReport {
    pub trials: u64,
    /// Decoded-trial counts per receiver.
    pub decoded: Vec<u64>,
    /// Trials in which every closed-form rank prediction matched the
    /// realized rank (generic-like schemes; equals `trials` otherwise).
    pub rank_agreement: u64,
    pub min_rank: Vec<usize>,
    pub max_rank: Vec<usize>,
    /// Seeds of trials where some receiver failed to decode (capped at 10).
    pub failing_seeds: Vec<u64>,
    /// The exact DoF pair, present iff every trial decoded everywhere.
    pub dof: Option<DofPoint>,
}

impl AggregateReport {
    pub fn decode_rate(&self, rx: usize) -> f64 {
        self.decoded[rx] as f64 / self.trials as f64
    }

    pub fn all_decoded(&self) -> bool {
        self.decoded.iter().all(|&d| d == self.trials)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "trials": self.trials,
            "decoded": self.decoded,
            "decode_rates": (0..self.decoded.len()).map(|i| self.decode_rate(i)).collect::<Vec<_>>(),
            "rank_agreement": self.rank_agreement,
            "min_rank": self.min_rank,
            "max_rank": self.max_rank,
            "failing_seeds": self.failing_seeds,
            "dof": self.dof.map(|p| json!({"d1": rat_str(p.d1), "d2": rat_str(p.d2)})),
        })
    }
}

fn aggregate(
    trials: u64,
    reports: impl Iterator<Item = (u64, Vec<ReceiverReport>, bool)>,
    dof_when_all: Option<DofPoint>,
) -> AggregateReport {
    let mut agg = AggregateReport {
        trials,
        decoded: Vec::new(),
        rank_agreement: 0,
        min_rank: Vec::new(),
        max_rank: Vec::new(),
        failing_seeds: Vec::new(),
        dof: None,
    };
    for (seed, recs, ranks_match) in reports {
        if agg.decoded.is_empty() {
            agg.decoded = vec![0; recs.len()];
            agg.min_rank = vec![usize::MAX; recs.len()];
            agg.max_rank = vec![0; recs.len()];
        }
        let mut all = true;
        for (i, r) in recs.iter().enumerate() {
            if r.decoded {
                agg.decoded[i] += 1;
            } else {
                all = false;
            }
            agg.min_rank[i] = agg.min_rank[i].min(r.achieved_rank);
            agg.max_rank[i] = agg.max_rank[i].max(r.achieved_rank);
        }
        if ranks_match {
            agg.rank_agreement += 1;
        }
        if !all && agg.failing_seeds.len() < 10 {
            agg.failing_seeds.push(seed);
        }
    }
    if agg.all_decoded() {
        agg.dof = dof_when_all;
    }
    agg
}

/// Run `trials` independent seeds of a two-user scheme.
pub fn monte_carlo(spec: &SchemeSpec, trials: u64, base_seed: u64) -> AggregateReport {
    assert!(trials >= 1);
    aggregate(
        trials,
        (0..trials).map(|i| {
            let seed = base_seed.wrapping_add(i);
            let rep = run_scheme(spec, seed);
            let ranks_match = rep.receivers.iter().all(|r| {
                r.predicted_rank.is_none_or(|p| p as usize == r.achieved_rank)
            });
            (seed, rep.receivers.to_vec(), ranks_match)
        }),
        Some(spec.dof()),
    )
}

/// Run `trials` independent seeds of the K-user MISO scheme.
pub fn monte_carlo_miso(mc: &MisoConfig, trials: u64, base_seed: u64) -> AggregateReport {
    assert!(trials >= 1);
    let k = mc.k as i64;
    let per_user = Rat::new(k, k * k - k + 1);
    aggregate(
        trials,
        (0..trials).map(|i| {
            let seed = base_seed.wrapping_add(i);
            let rep = run_miso(mc, seed);
            let ranks_match = rep.receivers.iter().all(|r| r.achieved_rank == rep.k);
            (seed, rep.receivers, ranks_match)
        }),
        // Symmetric per-user DoF; the sum is K²/(K²−K+1).
        Some(DofPoint::new(per_user, per_user)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AntennaConfig;
    use crate::schemes::corner_scheme;

    fn cfg(m1: u32, m2: u32, n1: u32, n2: u32) -> AntennaConfig {
        AntennaConfig::normalize(m1, m2, n1, n2).unwrap()
    }

    #[test]
    fn illustrative_2211_decodes() {
        let spec = corner_scheme(&cfg(2, 2, 1, 1), "P3").unwrap();
        let rep = run_generic(&spec, 42);
        assert!(rep.receivers[0].decoded && rep.receivers[1].decoded);
        assert_eq!(rep.dof.unwrap(), DofPoint::new(Rat::new(2, 3), Rat::new(2, 3)));
        assert!(!rep.receivers.iter().any(|r| r.discrepancy));
    }

    #[test]
    fn counterexample_2634_fails_at_rx2() {
        let spec = SchemeSpec::generic(cfg(2, 6, 3, 4), 3, 3, 1);
        let rep = run_generic(&spec, 7);
        assert!(rep.receivers[0].decoded);
        assert!(!rep.receivers[1].decoded);
        assert_eq!(rep.receivers[1].achieved_rank, 11);
        assert_eq!(rep.receivers[1].unknowns, 12);
        assert!(rep.dof.is_none());
        assert!(!rep.receivers[1].discrepancy); // predicted 11, achieved 11
    }

    #[test]
    fn special_corners_2634() {
        let c = cfg(2, 6, 3, 4);
        let t9 = corner_scheme(&c, "T9").unwrap();
        let rep = run_s2_t9(&t9, 5);
        assert_eq!(rep.receivers[0].equations, 15);
        assert_eq!(rep.receivers[0].unknowns, 15);
        assert_eq!(rep.receivers[1].equations, 20);
        assert_eq!(rep.receivers[1].unknowns, 20);
        assert!(rep.receivers[0].decoded && rep.receivers[1].decoded);
        assert_eq!(rep.dof.unwrap(), DofPoint::new(Rat::new(9, 5), Rat::new(11, 5)));
        let t7 = corner_scheme(&c, "T7").unwrap();
        let rep = run_scheme(&t7, 5);
        assert_eq!(rep.dof.unwrap(), DofPoint::new(Rat::new(2, 1), Rat::new(5, 3)));
    }

    #[test]
    fn s1_corners_decode() {
        let c = cfg(4, 8, 5, 6);
        for label in ["T5", "T7", "T8"] {
            let spec = corner_scheme(&c, label).unwrap();
            for seed in 0..3 {
                let rep = run_scheme(&spec, seed);
                assert!(
                    rep.receivers[0].decoded && rep.receivers[1].decoded,
                    "{label} seed {seed}: {rep:?}"
                );
                assert_eq!(rep.dof.unwrap(), spec.point, "{label}");
            }
        }
    }

    #[test]
    fn monte_carlo_2211() {
        let spec = corner_scheme(&cfg(2, 2, 1, 1), "P3").unwrap();
        let agg = monte_carlo(&spec, 50, 1);
        assert!(agg.all_decoded());
        assert_eq!(agg.rank_agreement, 50);
        assert_eq!(agg.dof.unwrap(), DofPoint::new(Rat::new(2, 3), Rat::new(2, 3)));
    }

    #[test]
    fn monte_carlo_bad_spec_never_decodes_rx2() {
        let spec = SchemeSpec::generic(cfg(2, 6, 3, 4), 3, 3, 1);
        let agg = monte_carlo(&spec, 50, 3);
        assert_eq!(agg.decoded[1], 0);
        assert_eq!(agg.decoded[0], 50);
        assert_eq!(agg.rank_agreement, 50); // formula predicted the failure
        assert_eq!(agg.failing_seeds.len(), 10);
    }

    #[test]
    fn miso_examples() {
        for (k, m) in [(2, 2), (3, 3), (3, 5), (4, 4)] {
            let mc = MisoConfig::new(k, m).unwrap();
            let rep = run_miso(&mc, 9);
            assert!(rep.receivers.iter().all(|r| r.decoded), "K={k} M={m}");
            let kk = k as i64;
            assert_eq!(rep.sum_dof.unwrap(), Rat::new(kk * kk, kk * kk - kk + 1));
        }
        // Extra antennas beyond K stay silent: same DoF.
        let a = run_miso(&MisoConfig::new(3, 3).unwrap(), 1);
        let b = run_miso(&MisoConfig::new(3, 5).unwrap(), 1);
        assert_eq!(a.sum_dof, b.sum_dof);
    }

    #[test]
    fn csit_discipline_perturbation() {
        // Perturbing every channel out of transmitter one must leave
        // transmitter two's signals untouched (and vice versa), for both the
        // generic and the special constructions.
        let cases = vec![
            corner_scheme(&cfg(3, 5, 2, 3), "Q3").unwrap(),
            corner_scheme(&cfg(2, 6, 3, 4), "T9").unwrap(),
            corner_scheme(&cfg(4, 8, 5, 6), "T5").unwrap(),
            corner_scheme(&cfg(4, 8, 5, 6), "T8").unwrap(),
        ];
        for spec in cases {
            let base: Transcript<PrimeField> = transcript(&spec, &MatrixSource::new(33));
            let p1: Transcript<PrimeField> =
                transcript(&spec, &MatrixSource::with_perturbed_tx(33, 1));
            assert_eq!(base.x[1], p1.x[1], "{}", spec.corner);
            assert_ne!(base.y[0], p1.y[0], "perturbation must actually change receptions");
            let p2: Transcript<PrimeField> =
                transcript(&spec, &MatrixSource::with_perturbed_tx(33, 2));
            assert_eq!(base.x[0], p2.x[0], "{}", spec.corner);
        }
    }

    #[test]
    fn csv_row_shape() {
        let spec = corner_scheme(&cfg(2, 2, 1, 1), "P3").unwrap();
        let rep = run_generic(&spec, 4);
        let row = rep.csv_row();
        assert_eq!(row.split(',').count(), TrialReport::csv_header().split(',').count());
        assert!(row.contains("2/3"));
    }
}

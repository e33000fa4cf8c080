//! Deterministic substreams derived from one master seed.
//!
//! Every random matrix in a trial (channel realizations, phase-two
//! combination matrices, information symbols) comes from its own
//! ChaCha stream keyed by the master seed plus a structural address
//! (kind, indices, slot). Transcripts are therefore reproducible, and any
//! single link or slot can be perturbed in isolation — which is how the
//! delayed-local-CSIT discipline is tested: perturbing all channels out of
//! one transmitter must not change the other transmitter's signals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::Scalar;
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StreamKind {
    Channel = 1,
    Combo = 2,
    Symbols = 3,
}

/// splitmix64 finalizer; decorrelates structured addresses.
fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn substream_seed(master: u64, kind: StreamKind, a: u64, b: u64, t: u64) -> u64 {
    let mut s = mix(master ^ 0x9e3779b97f4a7c15);
    for word in [kind as u64, a, b, t] {
        s = mix(s ^ word.wrapping_mul(0xd1b54a32d192ed03));
    }
    s
}

/// Factory for all randomness in one trial.
#[derive(Clone, Copy, Debug)]
pub struct MatrixSource {
    master: u64,
    /// When set, channels *out of* this transmitter are re-salted. Used only
    /// by the CSIT-discipline test.
    perturb_tx: Option<usize>,
}

impl MatrixSource {
    pub fn new(master: u64) -> Self {
        MatrixSource { master, perturb_tx: None }
    }

    /// A copy whose channels from transmitter `tx` (to every receiver, every
    /// slot) are redrawn; everything else is identical.
    pub fn with_perturbed_tx(master: u64, tx: usize) -> Self {
        MatrixSource { master, perturb_tx: Some(tx) }
    }

    fn rng(&self, kind: StreamKind, a: u64, b: u64, t: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(substream_seed(self.master, kind, a, b, t))
    }

    /// Channel matrix H[rx,tx](t), `rows x cols`, i.i.d. entries.
    pub fn channel<F: Scalar>(&self, rx: usize, tx: usize, t: usize, rows: usize, cols: usize) -> Matrix<F> {
        let salt = if self.perturb_tx == Some(tx) { 1u64 << 32 } else { 0 };
        let mut rng = self.rng(StreamKind::Channel, rx as u64 | salt, tx as u64, t as u64);
        Matrix::random(rows, cols, &mut rng)
    }

    /// Random combination matrix used by transmitter `tx` in slot `t`
    /// (the D/C/G matrices of the two-phase schemes). Independent of all
    /// channels by construction.
    pub fn combo<F: Scalar>(&self, tx: usize, t: usize, rows: usize, cols: usize) -> Matrix<F> {
        let mut rng = self.rng(StreamKind::Combo, tx as u64, 0, t as u64);
        Matrix::random(rows, cols, &mut rng)
    }

    /// Information symbols for one user.
    pub fn symbols<F: Scalar>(&self, user: usize, count: usize) -> Vec<F> {
        let mut rng = self.rng(StreamKind::Symbols, user as u64, 0, 0);
        (0..count).map(|_| F::sample(&mut rng)).collect()
    }
}

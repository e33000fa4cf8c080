//! Antenna configurations: normalization (N2 >= N1), derived scalars
//! (M', Δ, Δ', λ) and the class taxonomy C1..C6 with the C6 subdivision
//! into C61, C62, C63, S1, S2.

use serde::Serialize;
use thiserror::Error;

use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("antenna counts must all be >= 1")]
    ZeroAntenna,
    #[error("MISO configuration requires m >= k >= 2 (got k={k}, m={m})")]
    MisoUnsupported { k: u32, m: u32 },
}

/// Normalized two-user antenna configuration (always `n2 >= n1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AntennaConfig {
    m1: u32,
    m2: u32,
    n1: u32,
    n2: u32,
    /// True iff the users were exchanged to enforce `n2 >= n1`.
    swapped: bool,
}

/// Scalars derived from a normalized configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedParams {
    pub m1_prime: u32,
    pub m2_prime: u32,
    /// Δ = N1(N1-M1)/(N2-M1); undefined when N2 = M1.
    pub delta: Option<Rat>,
    /// Δ' = N1(M2-N2)/(M2-N1); undefined when M2 = N1.
    pub delta_prime: Option<Rat>,
    /// λ = M1+M2-N1-N2.
    pub lambda: i64,
}

/// Class taxonomy. Every normalized configuration belongs to exactly one
/// variant; C61/C62/C63/S1/S2 partition C6.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ConfigClass {
    C1,
    C2,
    C3,
    C4,
    C5,
    C61,
    C62,
    C63,
    S1,
    S2,
}

impl ConfigClass {
    pub fn is_c6(self) -> bool {
        use ConfigClass::*;
        matches!(self, C61 | C62 | C63 | S1 | S2)
    }

    pub fn is_s(self) -> bool {
        matches!(self, ConfigClass::S1 | ConfigClass::S2)
    }

    pub fn label(self) -> &'static str {
        use ConfigClass::*;
        match self {
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            C4 => "C4",
            C5 => "C5",
            C61 => "C61",
            C62 => "C62",
            C63 => "C63",
            S1 => "S1",
            S2 => "S2",
        }
    }
}

/// K-user MISO configuration (K single-antenna receivers, M antennas per
/// transmitter).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MisoConfig {
    pub k: u32,
    pub m: u32,
}

impl MisoConfig {
    pub fn new(k: u32, m: u32) -> Result<Self, ConfigError> {
        if k < 2 || m < k {
            return Err(ConfigError::MisoUnsupported { k, m });
        }
        Ok(MisoConfig { k, m })
    }
}

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}

impl AntennaConfig {
    /// Validate and normalize raw antenna counts so that `n2 >= n1`,
    /// swapping the two users if needed.
    pub fn normalize(m1: u32, m2: u32, n1: u32, n2: u32) -> Result<Self, ConfigError> {
        if m1 == 0 || m2 == 0 || n1 == 0 || n2 == 0 {
            return Err(ConfigError::ZeroAntenna);
        }
        if n1 > n2 {
            Ok(AntennaConfig { m1: m2, m2: m1, n1: n2, n2: n1, swapped: true })
        } else {
            Ok(AntennaConfig { m1, m2, n1, n2, swapped: false })
        }
    }

    pub fn m1(&self) -> u32 {
        self.m1
    }
    pub fn m2(&self) -> u32 {
        self.m2
    }
    pub fn n1(&self) -> u32 {
        self.n1
    }
    pub fn n2(&self) -> u32 {
        self.n2
    }
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn m1_prime(&self) -> u32 {
        self.m1.min(self.n1 + self.n2)
    }

    pub fn m2_prime(&self) -> u32 {
        self.m2.min(self.n1 + self.n2)
    }

    pub fn derived(&self) -> DerivedParams {
        let (m1, m2, n1, n2) = (self.m1 as i64, self.m2 as i64, self.n1 as i64, self.n2 as i64);
        DerivedParams {
            m1_prime: self.m1_prime(),
            m2_prime: self.m2_prime(),
            delta: (n2 != m1).then(|| rat(n1 * (n1 - m1), n2 - m1)),
            delta_prime: (m2 != n1).then(|| rat(n1 * (m2 - n2), m2 - n1)),
            lambda: m1 + m2 - n1 - n2,
        }
    }

    /// Classify the configuration.
    ///
    /// Within C6 the published subclass predicates are all strict in
    /// M1 < N1 and (for C62/C63) N1 < N2, which leaves boundary
    /// configurations unmatched; those are folded into the nearest
    /// subclass whose region/scheme formulas remain valid there:
    /// N1 = N2 boundaries keep the trapezoid shape and go to C61/C62 via
    /// the non-strict Δ/Δ' comparisons, while M1 = N1 boundaries keep the
    /// (possibly degenerate) pentagon shape and go to C63.
    pub fn classify(&self) -> ConfigClass {
        use ConfigClass::*;
        let (m1, m2, n1, n2) = (self.m1 as i64, self.m2 as i64, self.n1 as i64, self.n2 as i64);
        if m2 <= n1 {
            return C1;
        }
        if m1 > n1 {
            return if m2 <= n2 {
                C2
            } else if m1 <= n2 {
                C3
            } else {
                C4
            };
        }
        // m1 <= n1 and m2 > n1
        if m2 <= n2 {
            return C5;
        }
        // C6: m1 <= n1 <= n2 < m2
        let b = n1 + n2 - m1;
        let d = self.derived();
        let in_s = match d.delta {
            Some(delta) => delta < rat(m1, 1) && m1 < n1 && n1 < n2 && n2 < b && b < m2,
            None => false,
        };
        if in_s {
            let threshold = rat(n1 + n2, 1) - d.delta.unwrap();
            return if rat(m2, 1) <= threshold { S1 } else { S2 };
        }
        if m2 > b {
            match d.delta {
                Some(delta) if rat(m1, 1) <= delta => C61,
                _ => C63,
            }
        } else if d.delta_prime.is_some_and(|dp| rat(m1, 1) <= dp) {
            C62
        } else {
            C63
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ConfigClass::*;

    fn cfg(m1: u32, m2: u32, n1: u32, n2: u32) -> AntennaConfig {
        AntennaConfig::normalize(m1, m2, n1, n2).unwrap()
    }

    #[test]
    fn normalization() {
        let c = cfg(2, 2, 1, 1);
        assert_eq!((c.m1(), c.m2(), c.n1(), c.n2(), c.swapped()), (2, 2, 1, 1, false));
        let c = cfg(3, 2, 4, 1);
        assert_eq!((c.m1(), c.m2(), c.n1(), c.n2(), c.swapped()), (2, 3, 1, 4, true));
        let c = cfg(2, 6, 3, 4);
        assert!(!c.swapped());
        assert_eq!(AntennaConfig::normalize(0, 1, 1, 1), Err(ConfigError::ZeroAntenna));
    }

    #[test]
    fn normalize_is_idempotent() {
        for raw in [(3, 2, 4, 1), (2, 6, 3, 4), (5, 5, 5, 5)] {
            let once = AntennaConfig::normalize(raw.0, raw.1, raw.2, raw.3).unwrap();
            let twice =
                AntennaConfig::normalize(once.m1(), once.m2(), once.n1(), once.n2()).unwrap();
            assert_eq!((once.m1(), once.m2(), once.n1(), once.n2()),
                       (twice.m1(), twice.m2(), twice.n1(), twice.n2()));
        }
    }

    #[test]
    fn derived_frozen_values() {
        let d = cfg(2, 6, 3, 4).derived();
        assert_eq!(d.delta, Some(Rat::new(3, 2)));
        assert_eq!(d.delta_prime, Some(Rat::new(2, 1)));
        assert_eq!(d.lambda, 1);
        assert_eq!((d.m1_prime, d.m2_prime), (2, 6));

        let d = cfg(2, 2, 1, 1).derived();
        assert_eq!((d.m1_prime, d.m2_prime), (2, 2));
        assert_eq!(d.lambda, 2);

        // N2 = M1 makes Δ undefined.
        let d = cfg(3, 5, 2, 3).derived();
        assert_eq!(d.delta, None);
        assert!(d.delta_prime.is_some());
    }

    #[test]
    fn classify_frozen_examples() {
        assert_eq!(cfg(1, 1, 1, 1).classify(), C1);
        assert_eq!(cfg(2, 2, 1, 1).classify(), C4);
        assert_eq!(cfg(3, 2, 4, 1).classify(), C2); // normalized (2,3,1,4)
        assert_eq!(cfg(3, 5, 2, 3).classify(), C3);
        assert_eq!(cfg(2, 6, 3, 4).classify(), S2);
        assert_eq!(cfg(3, 7, 4, 5).classify(), S1); // M2 = N1+N2-Δ exactly
        assert_eq!(cfg(4, 8, 5, 6).classify(), S1); // strict interior of S1
        assert_eq!(cfg(2, 3, 2, 4).classify(), C5);
        assert_eq!(cfg(1, 5, 2, 3).classify(), C61); // Δ = 1 >= 1, M2 > N1+N2-M1
        assert_eq!(cfg(1, 4, 2, 3).classify(), C62); // Δ' = 1 >= 1, M2 = B
        assert_eq!(cfg(1, 5, 3, 4).classify(), C62); // Δ' = 3/2, M2 < B
        assert_eq!(cfg(2, 5, 3, 4).classify(), C63); // Δ' = 3/2 < 2, M2 <= B
    }

    #[test]
    fn classify_c6_boundaries() {
        // N1 = N2 boundaries route through the non-strict Δ/Δ' comparisons.
        assert_eq!(cfg(1, 4, 2, 2).classify(), C61);
        assert_eq!(cfg(2, 4, 3, 3).classify(), C62);
        // M1 = N1 boundaries fold into C63.
        assert_eq!(cfg(2, 4, 2, 3).classify(), C63);
        assert_eq!(cfg(2, 5, 2, 3).classify(), C63);
        assert_eq!(cfg(2, 5, 2, 2).classify(), C63); // Δ undefined (N2 = M1)
    }

    #[test]
    fn exhaustive_sweep_class_coverage() {
        for m1 in 1..=8u32 {
            for m2 in 1..=8u32 {
                for n1 in 1..=8u32 {
                    for n2 in n1..=8u32 {
                        let c = cfg(m1, m2, n1, n2);
                        let class = c.classify();
                        // Class-membership oracle evaluated independently.
                        let (m1, m2, n1, n2) =
                            (m1 as i64, m2 as i64, n1 as i64, n2 as i64);
                        let top = [
                            m2 <= n1,
                            m2 > n1 && m1 > n1 && m2 <= n2,
                            m2 > n1 && m1 > n1 && m2 > n2 && m1 <= n2,
                            m2 > n1 && m1 > n1 && m2 > n2 && m1 > n2,
                            m2 > n1 && m1 <= n1 && m2 <= n2,
                            m2 > n1 && m1 <= n1 && m2 > n2,
                        ];
                        assert_eq!(top.iter().filter(|&&b| b).count(), 1,
                                   "classes must partition: {:?}", c);
                        let expected_top = top.iter().position(|&b| b).unwrap();
                        let actual_top = match class {
                            C1 => 0,
                            C2 => 1,
                            C3 => 2,
                            C4 => 3,
                            C5 => 4,
                            _ => 5,
                        };
                        assert_eq!(actual_top, expected_top, "config {:?}", c);
                        if class.is_s() {
                            let d = c.derived();
                            let delta = d.delta.unwrap();
                            assert!(delta < Rat::new(m1, 1));
                            assert!(n1 + n2 - m1 < m2);
                        }
                    }
                }
            }
        }
    }
}

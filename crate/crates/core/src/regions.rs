//! The named DoF regions: achievable with delayed local CSIT, perfect-CSIT
//! outer bound, delayed-CSIT broadcast (transmitter-cooperation) outer bound,
//! the no-CSIT reference, their intersection, and the tightness verdict.

use serde_json::json;
use thiserror::Error;

use crate::config::{AntennaConfig, ConfigClass, MisoConfig};
use crate::geometry::{rat_str, DofPoint, GeometryError, HalfPlane, Polytope2D};
use crate::Rat;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("tightness cross-check failed for {cfg:?}: geometric={geometric}, case predicate={predicate:?}")]
    TightnessMismatch { cfg: AntennaConfig, geometric: bool, predicate: Option<TightnessCase> },
    #[error("{0}")]
    NotApplicable(String),
}

/// Which tightness case applies.
///
/// Cases A-E are the published list. The published D/E inequalities are
/// strict in Δ < N1 (resp. Δ' < N1) and case B is strict in N1 < M1; the
/// boundary configurations those strict inequalities exclude (N1 = N2, or
/// M1 = N1 with M2 >= N1+N2) are still exactly tight, so D, E and B here
/// use the non-strict comparison. `Square` covers the remaining
/// M1 = N1 = N2 < M2 family, where the perfect-CSIT sum bound collapses
/// the region to the simplex d1 + d2 <= N1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TightnessCase {
    A,
    B,
    C,
    D,
    E,
    Square,
}

impl TightnessCase {
    pub fn label(self) -> &'static str {
        match self {
            TightnessCase::A => "a",
            TightnessCase::B => "b",
            TightnessCase::C => "c",
            TightnessCase::D => "d",
            TightnessCase::E => "e",
            TightnessCase::Square => "square",
        }
    }
}

/// All regions and verdicts for one configuration.
#[derive(Clone, Debug)]
pub struct RegionBundle {
    pub config: AntennaConfig,
    pub class: ConfigClass,
    pub achievable: Polytope2D,
    pub perfect_csit: Polytope2D,
    pub bc_delayed: Polytope2D,
    pub no_csit: Polytope2D,
    pub outer: Polytope2D,
    pub tight: bool,
    pub tightness_case: Option<TightnessCase>,
    pub corner_points: Vec<(String, DofPoint)>,
}

fn rr(n: i64) -> Rat {
    Rat::from_integer(n)
}

fn dims(cfg: &AntennaConfig) -> (i64, i64, i64, i64) {
    (cfg.m1() as i64, cfg.m2() as i64, cfg.n1() as i64, cfg.n2() as i64)
}

fn base_halfplanes(cfg: &AntennaConfig) -> Vec<HalfPlane> {
    let (m1, m2, n1, n2) = dims(cfg);
    let (m1p, m2p) = (cfg.m1_prime() as i64, cfg.m2_prime() as i64);
    vec![
        HalfPlane::upper(1, m1),
        HalfPlane::upper(2, m2),
        HalfPlane::sum_bound(m1p.max(n2), n2),
        HalfPlane::sum_bound(n1, m2p.max(n1)),
    ]
}

/// The achievable DoF region with delayed local CSIT.
pub fn achievable_region(cfg: &AntennaConfig) -> Polytope2D {
    let (m1, _m2, n1, n2) = dims(cfg);
    match cfg.classify() {
        ConfigClass::S1 => {
            // base halfplane region intersected with L: d1/alpha + d2/(N1+N2) <= 1,
            // alpha = N1(N1+N2)/(2N1+N2-M1).
            let mut hs = base_halfplanes(cfg);
            hs.push(HalfPlane::new(
                Rat::new(2 * n1 + n2 - m1, n1 * (n1 + n2)),
                Rat::new(1, n1 + n2),
                rr(1),
            ));
            Polytope2D::from_halfplanes(&hs).expect("base region intersected with L is a valid polytope")
        }
        ConfigClass::S2 => {
            let b = n1 + n2 - m1; // = M2 - lambda
            let t9 = DofPoint::new(Rat::new(n1 * n1, b), rr(n2) - Rat::new(n1 * n1, b));
            let t7 = DofPoint::new(rr(m1), Rat::new(b * (n1 - m1), n1));
            Polytope2D::from_vertices(&[
                DofPoint::from_ints(0, 0),
                DofPoint::from_ints(m1, 0),
                DofPoint::from_ints(0, n2),
                t9,
                t7,
            ])
            .expect("pentagon is a valid polytope")
        }
        _ => Polytope2D::from_halfplanes(&base_halfplanes(cfg))
            .expect("base halfplane region is a valid polytope"),
    }
}

/// Raw corner formulas for the configuration's class, before any vertex or
/// degeneracy filtering.
fn corner_defs(cfg: &AntennaConfig) -> Vec<(&'static str, DofPoint)> {
    let (m1, m2, n1, n2) = dims(cfg);
    let m2p = cfg.m2_prime() as i64;
    let (m1p,) = (cfg.m1_prime() as i64,);
    let b = n1 + n2 - m1;
    let lambda = m1 + m2 - n1 - n2;
    let class = cfg.classify();
    let defs: Vec<(&str, DofPoint)> = match class {
        ConfigClass::C1 | ConfigClass::C2 => vec![],
        ConfigClass::C3 => vec![
            ("Q0", DofPoint::from_ints(0, 0)),
            ("Q1", DofPoint::from_ints(n1, 0)),
            ("Q2", DofPoint::from_ints(0, n2)),
            ("Q3", DofPoint::new(
                Rat::new(n1 * (m2p - n2), m2p - n1),
                Rat::new(m2p * (n2 - n1), m2p - n1),
            )),
        ],
        ConfigClass::C4 => vec![
            ("P0", DofPoint::from_ints(0, 0)),
            ("P1", DofPoint::from_ints(n1, 0)),
            ("P2", DofPoint::from_ints(0, n2)),
            ("P3", DofPoint::new(
                Rat::new(m1p * n1 * (m2p - n2), m1p * m2p - n1 * n2),
                Rat::new(m2p * n2 * (m1p - n1), m1p * m2p - n1 * n2),
            )),
        ],
        ConfigClass::C5 => vec![
            ("S0", DofPoint::from_ints(0, 0)),
            ("S1", DofPoint::from_ints(m1, 0)),
            ("S2", DofPoint::from_ints(0, m2)),
            ("S3", DofPoint::new(rr(m1), Rat::new(m2 * (n1 - m1), n1))),
        ],
        ConfigClass::C61 | ConfigClass::C62 => vec![
            ("T0", DofPoint::from_ints(0, 0)),
            ("T1", DofPoint::from_ints(m1, 0)),
            ("T2", DofPoint::from_ints(0, n2)),
            ("T4", DofPoint::from_ints(m1, n2 - m1)),
        ],
        ConfigClass::C63 => vec![
            ("T0", DofPoint::from_ints(0, 0)),
            ("T1", DofPoint::from_ints(m1, 0)),
            ("T2", DofPoint::from_ints(0, n2)),
            // M2' rather than M2: identical on the published subclass
            // (where M2 < N1+N2) and correct on the folded M1 = N1
            // boundary, where M2 may exceed N1+N2.
            ("T5", DofPoint::new(
                Rat::new(n1 * (m2p - n2), m2p - n1),
                Rat::new(m2p * (n2 - n1), m2p - n1),
            )),
            ("T6", DofPoint::new(rr(m1), Rat::new(m2p * (n1 - m1), n1))),
        ],
        ConfigClass::S1 => vec![
            ("T0", DofPoint::from_ints(0, 0)),
            ("T1", DofPoint::from_ints(m1, 0)),
            ("T2", DofPoint::from_ints(0, n2)),
            ("T5", DofPoint::new(
                Rat::new(n1 * (m2 - n2), m2 - n1),
                Rat::new(m2 * (n2 - n1), m2 - n1),
            )),
            ("T7", DofPoint::new(rr(m1), Rat::new(b * (n1 - m1), n1))),
            ("T8", DofPoint::new(
                Rat::new(n1 * (m1 - lambda), n1 - lambda),
                Rat::new(m2 * (n1 - m1), n1 - lambda),
            )),
        ],
        ConfigClass::S2 => vec![
            ("T0", DofPoint::from_ints(0, 0)),
            ("T1", DofPoint::from_ints(m1, 0)),
            ("T2", DofPoint::from_ints(0, n2)),
            ("T7", DofPoint::new(rr(m1), Rat::new(b * (n1 - m1), n1))),
            ("T9", DofPoint::new(Rat::new(n1 * n1, b), rr(n2) - Rat::new(n1 * n1, b))),
        ],
    };
    defs
}

/// Named corner points of the achievable region, restricted to actual
/// vertices (degenerate coincidences keep the first label in class order).
pub fn corner_points(cfg: &AntennaConfig) -> Vec<(String, DofPoint)> {
    let region = achievable_region(cfg);
    let mut out: Vec<(String, DofPoint)> = Vec::new();
    for (label, p) in corner_defs(cfg) {
        if region.is_vertex(p) && !out.iter().any(|(_, q)| *q == p) {
            out.push((label.to_string(), p));
        }
    }
    out
}

/// Look up one named corner among the deduplicated vertex labels.
pub fn named_corner(cfg: &AntennaConfig, label: &str) -> Option<DofPoint> {
    corner_points(cfg).into_iter().find(|(l, _)| l == label).map(|(_, p)| p)
}

/// The raw corner formula for `label`, if the class defines it and the point
/// is an actual vertex of the achievable region. Unlike [`named_corner`],
/// coincident labels (e.g. T8 = T5 on the boundary of S1) all resolve.
pub fn corner_formula(cfg: &AntennaConfig, label: &str) -> Option<DofPoint> {
    let p = corner_defs(cfg).into_iter().find(|(l, _)| *l == label).map(|(_, p)| p)?;
    achievable_region(cfg).is_vertex(p).then_some(p)
}

/// Perfect-CSIT DoF region.
pub fn perfect_csit_region(cfg: &AntennaConfig) -> Polytope2D {
    let (m1, m2, n1, n2) = dims(cfg);
    let s = (m1 + m2).min(n1 + n2).min(m1.max(n2)).min(m2.max(n1));
    Polytope2D::from_halfplanes(&[
        HalfPlane::upper(1, m1.min(n1)),
        HalfPlane::upper(2, m2.min(n2)),
        HalfPlane::sum_bound(s, s),
    ])
    .expect("perfect-CSIT region is a valid polytope")
}

/// Delayed-CSIT broadcast outer bound with full transmitter cooperation
/// (M = M1 + M2 antennas).
pub fn bc_delayed_region(cfg: &AntennaConfig) -> Polytope2D {
    let (m1, m2, n1, n2) = dims(cfg);
    let m = m1 + m2;
    Polytope2D::from_halfplanes(&[
        HalfPlane::sum_bound(m.min(n1 + n2), m.min(n2)),
        HalfPlane::sum_bound(m.min(n1), m.min(n1 + n2)),
    ])
    .expect("broadcast bound is a valid polytope")
}

/// No-CSIT reference region.
pub fn no_csit_region(cfg: &AntennaConfig) -> Polytope2D {
    let (m1, m2, n1, n2) = dims(cfg);
    match cfg.classify() {
        ConfigClass::C1 => Polytope2D::from_halfplanes(&base_halfplanes(cfg))
            .expect("base halfplane region is a valid polytope"),
        ConfigClass::C2 | ConfigClass::C3 | ConfigClass::C4 => {
            Polytope2D::from_halfplanes(&[HalfPlane::sum_bound(m1.min(n1), m2.min(n2))])
                .expect("time-division region is a valid polytope")
        }
        ConfigClass::C5 => Polytope2D::from_vertices(&[
            DofPoint::from_ints(0, 0),
            DofPoint::from_ints(m1, 0),
            DofPoint::from_ints(m1, n1 - m1),
            DofPoint::from_ints(0, m2),
        ])
        .expect("no-CSIT trapezoid is a valid polytope"),
        _ => Polytope2D::from_vertices(&[
            DofPoint::from_ints(0, 0),
            DofPoint::from_ints(m1, 0),
            DofPoint::from_ints(m1, n1 - m1),
            DofPoint::from_ints(0, n2),
        ])
        .expect("no-CSIT trapezoid is a valid polytope"),
    }
}

/// Which tightness case (if any) covers this configuration.
pub fn tightness_case(cfg: &AntennaConfig) -> Option<TightnessCase> {
    let (m1, m2, n1, n2) = dims(cfg);
    let d = cfg.derived();
    let b = n1 + n2 - m1;
    if m2 <= n1 {
        return Some(TightnessCase::A);
    }
    if n1 <= m1 && m1 <= n2 && m2 >= n1 + n2 {
        return Some(TightnessCase::B);
    }
    if m1.min(m2) >= n1 + n2 {
        return Some(TightnessCase::C);
    }
    if d.delta.is_some_and(|delta| rr(m1) <= delta) && n2 < b && b < m2 {
        return Some(TightnessCase::D);
    }
    if d.delta_prime.is_some_and(|dp| rr(m1) <= dp && dp <= rr(n1)) && n2 < m2 && m2 <= b {
        return Some(TightnessCase::E);
    }
    if m1 == n1 && n1 == n2 && m2 > n2 {
        return Some(TightnessCase::Square);
    }
    None
}

/// Assemble all regions and cross-check the geometric tightness verdict
/// against the case predicate.
pub fn bundle(cfg: &AntennaConfig) -> Result<RegionBundle, RegionError> {
    let achievable = achievable_region(cfg);
    let perfect_csit = perfect_csit_region(cfg);
    let bc_delayed = bc_delayed_region(cfg);
    let no_csit = no_csit_region(cfg);
    let outer = perfect_csit.intersect(&bc_delayed)?;
    let tight = achievable.equals(&outer);
    let case = tightness_case(cfg);
    if tight != case.is_some() {
        return Err(RegionError::TightnessMismatch { cfg: *cfg, geometric: tight, predicate: case });
    }
    Ok(RegionBundle {
        config: *cfg,
        class: cfg.classify(),
        corner_points: corner_points(cfg),
        achievable,
        perfect_csit,
        bc_delayed,
        no_csit,
        outer,
        tight,
        tightness_case: case,
    })
}

/// Achievable and cooperation-upper sum-DoF bounds for the K-user MISO IC.
pub fn miso_bounds(mc: &MisoConfig) -> (Rat, Rat) {
    let k = mc.k as i64;
    let den = k * k - k + 1;
    (Rat::new(k * k, den), Rat::new(k * (k * k - 2 * k + 2), den))
}

/// Closed-form sum-DoF for class C4 with min(M1, M2) >= N1+N2, cross-checked
/// against vertex enumeration.
pub fn c4_sum_dof(cfg: &AntennaConfig) -> Result<Rat, RegionError> {
    let (m1, m2, n1, n2) = dims(cfg);
    if cfg.classify() != ConfigClass::C4 || m1.min(m2) < n1 + n2 {
        return Err(RegionError::NotApplicable(format!(
            "sum-DoF closed form needs class C4 with min(M1,M2) >= N1+N2; got {:?}",
            cfg
        )));
    }
    let value = (rr(1) - Rat::new(n1 * n2, n1 * n1 + n2 * n2 + n1 * n2)) * rr(n1 + n2);
    let geometric = achievable_region(cfg).max_linear(rr(1), rr(1));
    assert_eq!(value, geometric, "closed form disagrees with vertex enumeration for {cfg:?}");
    Ok(value)
}

impl RegionBundle {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "config": {
                "m1": self.config.m1(),
                "m2": self.config.m2(),
                "n1": self.config.n1(),
                "n2": self.config.n2(),
                "swapped": self.config.swapped(),
            },
            "class": self.class.label(),
            "tight": self.tight,
            "tightness_case": self.tightness_case.map(TightnessCase::label),
            "corner_points": self.corner_points.iter().map(|(label, p)| json!({
                "label": label,
                "d1": rat_str(p.d1),
                "d2": rat_str(p.d2),
            })).collect::<Vec<_>>(),
            "achievable": self.achievable.to_json(),
            "perfect_csit": self.perfect_csit.to_json(),
            "bc_delayed": self.bc_delayed.to_json(),
            "no_csit": self.no_csit.to_json(),
            "outer": self.outer.to_json(),
        })
    }

    /// Self-contained SVG with the nested no-CSIT / achievable / outer
    /// regions, axes and corner labels.
    pub fn to_svg(&self) -> String {
        let size = 640.0;
        let margin = 60.0;
        let axis_max = (self.config.n1() + self.config.n2())
            .max(self.config.m1())
            .max(self.config.m2()) as f64;
        let scale = (size - 2.0 * margin) / axis_max;
        let px = |p: &DofPoint| -> (f64, f64) {
            let x = *p.d1.numer() as f64 / *p.d1.denom() as f64;
            let y = *p.d2.numer() as f64 / *p.d2.denom() as f64;
            (margin + x * scale, size - margin - y * scale)
        };
        let poly_points = |poly: &Polytope2D| -> String {
            poly.vertices()
                .iter()
                .map(|v| {
                    let (x, y) = px(v);
                    format!("{x:.2},{y:.2}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" style=\"font:16px sans-serif\">(M1,M2,N1,N2)=({},{},{},{}) class {} {}</text>\n",
            size / 2.0,
            self.config.m1(), self.config.m2(), self.config.n1(), self.config.n2(),
            self.class.label(),
            if self.tight { "(tight)" } else { "(not tight)" }
        ));
        for (poly, fill, stroke, label) in [
            (&self.outer, "#9ecae1", "#3182bd", "outer bound"),
            (&self.achievable, "#fdae6b", "#e6550d", "achievable (delayed local CSIT)"),
            (&self.no_csit, "#bdbdbd", "#636363", "no CSIT"),
        ] {
            s.push_str(&format!(
                "<polygon points=\"{}\" style=\"fill:{fill};fill-opacity:0.55;stroke:{stroke};stroke-width:1.5\"><title>{label}</title></polygon>\n",
                poly_points(poly)
            ));
        }
        // axes with unit ticks
        let (ox, oy) = (margin, size - margin);
        s.push_str(&format!(
            "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{}\" y2=\"{oy}\" stroke=\"black\"/>\n<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ox}\" y2=\"{margin}\" stroke=\"black\"/>\n",
            size - margin / 2.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" style=\"font:14px sans-serif\">d1</text>\n<text x=\"{}\" y=\"{}\" style=\"font:14px sans-serif\">d2</text>\n",
            size - margin / 2.0 + 4.0, oy + 5.0, ox - 8.0, margin - 10.0
        ));
        for t in 0..=(axis_max as i64) {
            let x = margin + t as f64 * scale;
            let y = size - margin - t as f64 * scale;
            s.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{oy}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" style=\"font:11px sans-serif\">{t}</text>\n",
                oy + 5.0, oy + 18.0
            ));
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{ox}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" style=\"font:11px sans-serif\">{t}</text>\n",
                ox - 5.0, ox - 8.0, y + 4.0
            ));
        }
        for (label, p) in &self.corner_points {
            let (x, y) = px(p);
            s.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#e6550d\"/><text x=\"{:.2}\" y=\"{:.2}\" style=\"font:12px sans-serif\">{label}</text>\n",
                x + 6.0, y - 4.0
            ));
        }
        // legend
        for (i, (color, label)) in [
            ("#9ecae1", "outer bound"),
            ("#fdae6b", "achievable (delayed local CSIT)"),
            ("#bdbdbd", "no CSIT"),
        ]
        .iter()
        .enumerate()
        {
            let y = margin + 10.0 + 20.0 * i as f64;
            s.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"14\" height=\"14\" fill=\"{color}\" fill-opacity=\"0.55\"/><text x=\"{:.2}\" y=\"{:.2}\" style=\"font:12px sans-serif\">{label}</text>\n",
                size - 290.0, size - 270.0, y + 11.0
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

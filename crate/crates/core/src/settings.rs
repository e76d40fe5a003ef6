//! Measurement configurations.
//!
//! Alice measures three pairs `(a_i, a'_i)` separated by a common angle
//! `theta`, with `a'_i - a_i = 2 sin(theta/2) e_i` for an orthonormal triad
//! `{e_i}`. Every other party has one setting per pair index `i`.
//!
//! [`MeasurementConfig`] is a plain record so that invalid configurations can
//! be represented, reported and rejected; [`MeasurementConfig::validate`] is
//! the gate.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{BlochVector, MAX_QUBITS};
use crate::vec3::{self, Vec3};

/// Tolerance for every geometric check on a configuration.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Smallest party count for which the inequality is defined.
pub const MIN_PARTIES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    pub n: usize,
    pub theta: f64,
    /// `(a_i, a'_i)` for `i = 1..3`.
    pub alice_pairs: [(Vec3, Vec3); 3],
    /// One entry per party after Alice; entry `k` holds that party's settings
    /// for `i = 1..3`.
    pub partner_settings: Vec<[Vec3; 3]>,
    pub triad: [Vec3; 3],
}

/// One failed invariant of a [`MeasurementConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Malformed { message: String },
    PartyCount { n: usize },
    PartnerCount { expected: usize, found: usize },
    ThetaOutOfRange { theta: f64 },
    NonFinite { what: String },
    NonUnit { what: String, norm: f64 },
    TriadNotOrthogonal { i: usize, j: usize, dot: f64 },
    DifferenceConstraint { pair: usize, residual: f64 },
    PairAngle { pair: usize, residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Malformed { message } => write!(f, "malformed configuration: {message}"),
            Self::PartyCount { n } => {
                write!(f, "party count {n} outside {MIN_PARTIES}..={MAX_QUBITS}")
            }
            Self::PartnerCount { expected, found } => {
                write!(
                    f,
                    "expected {expected} partner setting triples, found {found}"
                )
            }
            Self::ThetaOutOfRange { theta } => write!(f, "theta = {theta} outside [0, pi]"),
            Self::NonFinite { what } => write!(f, "{what} is not finite"),
            Self::NonUnit { what, norm } => write!(f, "{what} has norm {norm}"),
            Self::TriadNotOrthogonal { i, j, dot } => {
                write!(f, "triad e{i}.e{j} = {dot}, expected 0")
            }
            Self::DifferenceConstraint { pair, residual } => {
                write!(
                    f,
                    "pair {pair}: a' - a deviates from 2 sin(theta/2) e by {residual:e}"
                )
            }
            Self::PairAngle { pair, residual } => {
                write!(
                    f,
                    "pair {pair}: a.a' deviates from cos(theta) by {residual:e}"
                )
            }
        }
    }
}

/// A validated configuration with all directions resolved to [`BlochVector`]s.
///
/// `tuples[2*(i-1)]` is `(a_i, partners_i)`, `tuples[2*(i-1)+1]` is
/// `(a'_i, partners_i)`, each as a full direction list ordered by party.
#[derive(Debug, Clone)]
pub struct ResolvedSettings {
    pub theta: f64,
    pub tuples: [Vec<BlochVector>; 6],
}

impl MeasurementConfig {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(MIN_PARTIES..=MAX_QUBITS).contains(&self.n) {
            out.push(Violation::PartyCount { n: self.n });
        }
        if self.partner_settings.len() + 1 != self.n {
            out.push(Violation::PartnerCount {
                expected: self.n.saturating_sub(1),
                found: self.partner_settings.len(),
            });
        }
        if !self.theta.is_finite() {
            out.push(Violation::NonFinite {
                what: "theta".into(),
            });
        } else if !(0.0..=PI).contains(&self.theta) {
            out.push(Violation::ThetaOutOfRange { theta: self.theta });
        }

        let mut check_unit = |what: String, v: &Vec3| {
            if v.iter().any(|c| !c.is_finite()) {
                out.push(Violation::NonFinite { what });
                return;
            }
            let norm = vec3::norm(v);
            if (norm - 1.0).abs() > GEOMETRY_TOL {
                out.push(Violation::NonUnit { what, norm });
            }
        };
        for (i, e) in self.triad.iter().enumerate() {
            check_unit(format!("triad e{}", i + 1), e);
        }
        for (i, (a, ap)) in self.alice_pairs.iter().enumerate() {
            check_unit(format!("a{}", i + 1), a);
            check_unit(format!("a'{}", i + 1), ap);
        }
        for (k, triple) in self.partner_settings.iter().enumerate() {
            for (i, v) in triple.iter().enumerate() {
                check_unit(format!("party {} setting {}", k + 2, i + 1), v);
            }
        }

        for i in 0..3 {
            for j in i + 1..3 {
                let d = vec3::dot(&self.triad[i], &self.triad[j]);
                if d.abs() > GEOMETRY_TOL || !d.is_finite() {
                    out.push(Violation::TriadNotOrthogonal {
                        i: i + 1,
                        j: j + 1,
                        dot: d,
                    });
                }
            }
        }

        let half = self.theta / 2.0;
        for (i, (a, ap)) in self.alice_pairs.iter().enumerate() {
            let expected = vec3::scale(&self.triad[i], 2.0 * half.sin());
            let residual = vec3::max_abs_diff(&vec3::sub(ap, a), &expected);
            if residual > GEOMETRY_TOL || !residual.is_finite() {
                out.push(Violation::DifferenceConstraint {
                    pair: i + 1,
                    residual,
                });
            }
            let residual = (vec3::dot(a, ap) - self.theta.cos()).abs();
            if residual > GEOMETRY_TOL || !residual.is_finite() {
                out.push(Violation::PairAngle {
                    pair: i + 1,
                    residual,
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Parses JSON and rejects the result unless every invariant holds.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::InvalidConfig(vec![Violation::Malformed {
                message: e.to_string(),
            }])
        })?;
        let violations = cfg.validate();
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    pub fn resolve(&self) -> Result<ResolvedSettings> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        Ok(self.resolve_unchecked())
    }

    /// Converts to unit directions, renormalizing within tolerance. Only
    /// meaningful for configurations that pass [`validate`](Self::validate).
    pub(crate) fn resolve_unchecked(&self) -> ResolvedSettings {
        let unit = |v: &Vec3| BlochVector::normalized(*v).expect("validated direction");
        let tuple = |i: usize, alice: &Vec3| {
            std::iter::once(unit(alice))
                .chain(self.partner_settings.iter().map(|t| unit(&t[i])))
                .collect::<Vec<_>>()
        };
        let p = &self.alice_pairs;
        ResolvedSettings {
            theta: self.theta,
            tuples: [
                tuple(0, &p[0].0),
                tuple(0, &p[0].1),
                tuple(1, &p[1].0),
                tuple(1, &p[1].1),
                tuple(2, &p[2].0),
                tuple(2, &p[2].1),
            ],
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// Reference triad `e1 = y, e2 = z, e3 = x`; the identity rotation in
/// [`parametrized_config`] maps to it.
pub const REFERENCE_TRIAD: [Vec3; 3] = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];

/// Alice's pairs tied to the reference triad; shared by [`reference_settings`]
/// and [`ghz_optimal_settings`].
fn reference_alice_pairs(theta: f64) -> [(Vec3, Vec3); 3] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        ([c, -s, 0.0], [c, s, 0.0]),
        ([0.0, c, -s], [0.0, c, s]),
        ([-s, c, 0.0], [s, c, 0.0]),
    ]
}

/// The explicit three-party settings under which GHZ_3 reaches
/// `6 cos(theta/2) + 2 sin(theta/2)`.
pub fn reference_settings(theta: f64) -> Result<MeasurementConfig> {
    check_theta(theta)?;
    let x = [1.0, 0.0, 0.0];
    let diag = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
    Ok(MeasurementConfig {
        n: 3,
        theta,
        alice_pairs: reference_alice_pairs(theta),
        partner_settings: vec![[x, diag, diag], [x, diag, diag]],
        triad: REFERENCE_TRIAD,
    })
}

/// n-party extension of [`reference_settings`]: every partner measures along
/// `x` for `i = 1` and at azimuth `pi / (2(n-1))` for `i = 2, 3`, so the
/// partners' product of `(x - i y)` factors is `1` and `-i` respectively.
pub fn ghz_optimal_settings(n: usize, theta: f64) -> Result<MeasurementConfig> {
    if !(3..=MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n));
    }
    check_theta(theta)?;
    let phase = PI / (2.0 * (n - 1) as f64);
    let tilted = BlochVector::equatorial(phase).to_array();
    let x = [1.0, 0.0, 0.0];
    Ok(MeasurementConfig {
        n,
        theta,
        alice_pairs: reference_alice_pairs(theta),
        partner_settings: vec![[x, tilted, tilted]; n - 1],
        triad: REFERENCE_TRIAD,
    })
}

/// Unconstrained coordinates of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsParams {
    /// Roll, pitch, yaw applied to [`REFERENCE_TRIAD`].
    pub triad_rotation: [f64; 3],
    /// In-plane phase of `f_i` within the plane orthogonal to `e_i`.
    pub alice_phases: [f64; 3],
    /// Per partner, per pair index: `(polar, azimuth)`.
    pub partner_angles: Vec<[(f64, f64); 3]>,
}

impl SettingsParams {
    pub fn len_for(n: usize) -> usize {
        6 + 6 * (n - 1)
    }

    pub fn from_slice(n: usize, p: &[f64]) -> Self {
        assert_eq!(p.len(), Self::len_for(n));
        let partner_angles = (0..n - 1)
            .map(|k| {
                let q = &p[6 + 6 * k..12 + 6 * k];
                [(q[0], q[1]), (q[2], q[3]), (q[4], q[5])]
            })
            .collect();
        Self {
            triad_rotation: [p[0], p[1], p[2]],
            alice_phases: [p[3], p[4], p[5]],
            partner_angles,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(6 + 6 * self.partner_angles.len());
        v.extend_from_slice(&self.triad_rotation);
        v.extend_from_slice(&self.alice_phases);
        for t in &self.partner_angles {
            for &(polar, azimuth) in t {
                v.push(polar);
                v.push(azimuth);
            }
        }
        v
    }
}

/// Builds a configuration that satisfies every invariant by construction.
///
/// `a_i = -sin(theta/2) e_i + cos(theta/2) f_i` and
/// `a'_i = a_i + 2 sin(theta/2) e_i`, where
/// `f_i = cos(phi_i) e_{i+1} + sin(phi_i) e_{i+2}` (indices cyclic).
pub fn parametrized_config(
    n: usize,
    theta: f64,
    params: &SettingsParams,
) -> Result<MeasurementConfig> {
    if !(MIN_PARTIES..=MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n));
    }
    if params.partner_angles.len() + 1 != n {
        return Err(Error::Unsupported(format!(
            "{} partner angle sets for {n} parties",
            params.partner_angles.len()
        )));
    }
    let all_finite = params
        .to_vec()
        .iter()
        .chain(std::iter::once(&theta))
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::NonFinite("settings parameter"));
    }
    check_theta(theta)?;

    let [roll, pitch, yaw] = params.triad_rotation;
    let rot = Rotation3::from_euler_angles(roll, pitch, yaw);
    let triad: [Vec3; 3] = std::array::from_fn(|i| {
        let r = rot * Vector3::from(REFERENCE_TRIAD[i]);
        [r.x, r.y, r.z]
    });

    let (s, c) = (theta / 2.0).sin_cos();
    let alice_pairs = std::array::from_fn(|i| {
        let (sp, cp) = params.alice_phases[i].sin_cos();
        let f = vec3::add(
            &vec3::scale(&triad[(i + 1) % 3], cp),
            &vec3::scale(&triad[(i + 2) % 3], sp),
        );
        let a = vec3::add(&vec3::scale(&triad[i], -s), &vec3::scale(&f, c));
        let ap = vec3::add(&vec3::scale(&triad[i], s), &vec3::scale(&f, c));
        (a, ap)
    });
    let partner_settings = params
        .partner_angles
        .iter()
        .map(|t| std::array::from_fn(|i| vec3::spherical(t[i].0, t[i].1)))
        .collect();
    Ok(MeasurementConfig {
        n,
        theta,
        alice_pairs,
        partner_settings,
        triad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_theta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn close(a: &Vec3, b: &Vec3) -> bool {
        vec3::max_abs_diff(a, b) < 1e-12
    }

    #[test]
    fn reference_settings_examples() {
        let s10 = 10f64.sqrt();
        let cfg = reference_settings(optimal_theta()).unwrap();
        assert!(close(&cfg.alice_pairs[0].0, &[3.0 / s10, -1.0 / s10, 0.0]));

        for theta in [0.1, 1.0, 2.5] {
            let cfg = reference_settings(theta).unwrap();
            let (a, ap) = cfg.alice_pairs[0];
            assert!(close(
                &vec3::sub(&ap, &a),
                &[0.0, 2.0 * (theta / 2.0).sin(), 0.0]
            ));
        }
        let cfg = reference_settings(FRAC_PI_2).unwrap();
        let (a, ap) = cfg.alice_pairs[0];
        assert!(vec3::dot(&a, &ap).abs() < 1e-12);
        assert_eq!(
            cfg.triad,
            [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
        );
    }

    #[test]
    fn reference_settings_range() {
        assert!(reference_settings(-0.1).is_err());
        assert!(reference_settings(3.2).is_err());
        assert!(reference_settings(f64::NAN).is_err());
        for k in 1..200 {
            let theta = PI * k as f64 / 200.0;
            assert_eq!(reference_settings(theta).unwrap().validate(), vec![]);
        }
    }

    #[test]
    fn ghz_optimal_reduces_to_reference_for_three_parties() {
        let a = ghz_optimal_settings(3, 0.7).unwrap();
        let b = reference_settings(0.7).unwrap();
        assert_eq!(a.alice_pairs, b.alice_pairs);
        for (p, q) in a.partner_settings.iter().zip(&b.partner_settings) {
            for i in 0..3 {
                assert!(close(&p[i], &q[i]));
            }
        }
        assert!(ghz_optimal_settings(2, 0.7).is_err());
        assert!(ghz_optimal_settings(4, 4.0).is_err());
    }

    #[test]
    fn ghz_optimal_partner_phase_product() {
        use num_complex::Complex64;
        let cfg = ghz_optimal_settings(4, 0.5).unwrap();
        assert!(close(
            &cfg.partner_settings[0][1],
            &BlochVector::equatorial(FRAC_PI_6).to_array()
        ));
        let prod: Complex64 = cfg
            .partner_settings
            .iter()
            .map(|t| Complex64::new(t[1][0], -t[1][1]))
            .product();
        assert!((prod - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(cfg.is_valid());
    }

    #[test]
    fn identity_parametrization_reproduces_reference_settings() {
        // f1 = x = e3, f2 = y = e1, f3 = y = e1
        let params = SettingsParams {
            triad_rotation: [0.0; 3],
            alice_phases: [FRAC_PI_2, FRAC_PI_2, 0.0],
            partner_angles: vec![
                [
                    (FRAC_PI_2, 0.0),
                    (FRAC_PI_2, FRAC_PI_4),
                    (FRAC_PI_2, FRAC_PI_4)
                ];
                2
            ],
        };
        for theta in [0.3, optimal_theta(), 2.0] {
            let got = parametrized_config(3, theta, &params).unwrap();
            let want = reference_settings(theta).unwrap();
            for i in 0..3 {
                assert!(close(&got.triad[i], &want.triad[i]));
                assert!(close(&got.alice_pairs[i].0, &want.alice_pairs[i].0));
                assert!(close(&got.alice_pairs[i].1, &want.alice_pairs[i].1));
                for k in 0..2 {
                    assert!(close(
                        &got.partner_settings[k][i],
                        &want.partner_settings[k][i]
                    ));
                }
            }
        }
    }

    fn random_params(rng: &mut impl Rng, n: usize) -> (f64, SettingsParams) {
        let v: Vec<f64> = (0..SettingsParams::len_for(n))
            .map(|_| rng.random_range(-7.0..7.0))
            .collect();
        (rng.random_range(0.0..PI), SettingsParams::from_slice(n, &v))
    }

    #[test]
    fn parametrized_configs_are_always_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let n = rng.random_range(2..=6);
            let (theta, p) = random_params(&mut rng, n);
            let cfg = parametrized_config(n, theta, &p).unwrap();
            assert_eq!(cfg.validate(), vec![]);
            let s = (theta / 2.0).sin();
            for i in 0..3 {
                assert!((vec3::dot(&cfg.alice_pairs[i].0, &cfg.triad[i]) + s).abs() < 1e-12);
            }
            assert_eq!(SettingsParams::from_slice(n, &p.to_vec()), p);
        }
    }

    #[test]
    fn degenerate_pair_at_zero_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, p) = random_params(&mut rng, 3);
        let cfg = parametrized_config(3, 0.0, &p).unwrap();
        for (a, ap) in cfg.alice_pairs {
            assert_eq!(a, ap);
        }
    }

    #[test]
    fn parametrized_rejects_non_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, mut p) = random_params(&mut rng, 3);
        assert!(parametrized_config(3, f64::INFINITY, &p).is_err());
        p.alice_phases[1] = f64::NAN;
        assert!(parametrized_config(3, 1.0, &p).is_err());
    }

    #[test]
    fn validate_reports_violations() {
        assert!(reference_settings(1.0).unwrap().validate().is_empty());

        let mut cfg = reference_settings(1.0).unwrap();
        cfg.triad[1] = cfg.triad[0];
        let v = cfg.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::TriadNotOrthogonal { i: 1, j: 2, .. })));

        let mut cfg = reference_settings(1.0).unwrap();
        cfg.alice_pairs[0].1[0] += 1e-3;
        let v = cfg.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DifferenceConstraint { pair: 1, .. })));
        // all failures are reported, not just the first
        assert!(v.iter().any(|x| matches!(x, Violation::NonUnit { .. })));

        let mut cfg = reference_settings(1.0).unwrap();
        cfg.partner_settings.pop();
        assert!(cfg
            .validate()
            .iter()
            .any(|x| matches!(x, Violation::PartnerCount { .. })));
    }

    #[test]
    fn json_round_trip_revalidates() {
        let cfg = reference_settings(0.9).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(MeasurementConfig::from_json(&text).unwrap(), cfg);

        let mut bad = cfg.clone();
        bad.alice_pairs[2].0 = [1.0, 0.0, 0.0];
        let text = serde_json::to_string(&bad).unwrap();
        match MeasurementConfig::from_json(&text) {
            Err(Error::InvalidConfig(v)) => assert!(!v.is_empty()),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(MeasurementConfig::from_json("{not json").is_err());
    }

    #[test]
    fn triad_covers_every_direction() {
        // sum_i |e_i . u| >= 1 for unit u and orthonormal e_i
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let (theta, p) = random_params(&mut rng, 2);
            let cfg = parametrized_config(2, theta, &p).unwrap();
            for _ in 0..100 {
                let u = BlochVector::from_spherical(
                    rng.random_range(0.0..PI),
                    rng.random_range(0.0..6.3),
                );
                let s: f64 = cfg
                    .triad
                    .iter()
                    .map(|e| vec3::dot(e, &u.to_array()).abs())
                    .sum();
                assert!(s >= 1.0 - 1e-12);
            }
        }
    }
}

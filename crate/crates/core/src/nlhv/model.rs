//! Sampled Leggett-type models: finite mixtures of subensembles with definite
//! polarizations `(u, v, s)` and Malus-law marginals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, UnitSphere};
use serde::{Deserialize, Serialize};

use super::{check_positivity, l_coefficients, LCoefficients, PROB_TOL};
use crate::error::{Error, Result};
use crate::inequality::InequalityReport;
use crate::quantum::BlochVector;
use crate::settings::MeasurementConfig;

/// Rejection attempts for the conditional `(L_AB, L_AC, L_ABC)` draw before
/// falling back to the product completion.
const MAX_REJECTION_TRIES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Outcomes independent within a subensemble; every party obeys Malus's
    /// law.
    Product,
    /// Only Alice's marginal is pinned to `u.a`; the remaining coefficients
    /// are drawn at random subject to positivity and no-signaling.
    #[default]
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationCoupling {
    /// `u`, `v`, `s` drawn independently and uniformly on the sphere.
    #[default]
    Independent,
    /// One uniform draw shared by all three parties.
    Aligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub subensembles: usize,
    pub variant: ModelVariant,
    pub coupling: PolarizationCoupling,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            subensembles: 64,
            variant: ModelVariant::General,
            coupling: PolarizationCoupling::Independent,
        }
    }
}

/// Conditional outcome distribution of one subensemble for one setting tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubensembleDistribution {
    pub u: BlochVector,
    pub v: BlochVector,
    pub s: BlochVector,
    pub probs: [f64; 8],
}

impl SubensembleDistribution {
    pub fn l(&self) -> LCoefficients {
        l_coefficients(&self.probs).expect("validated distribution")
    }
}

/// One subensemble: its weight and a distribution per setting tuple, in the
/// report's `Q` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subensemble {
    pub weight: f64,
    pub u: BlochVector,
    pub v: BlochVector,
    pub s: BlochVector,
    pub tuples: Vec<SubensembleDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub config: MeasurementConfig,
    pub seed: Option<u64>,
    pub subensembles: Vec<Subensemble>,
}

impl EnsembleModel {
    /// Checks weights and every conditional distribution.
    pub fn new(config: MeasurementConfig, subensembles: Vec<Subensemble>) -> Result<Self> {
        if config.n != 3 {
            return Err(Error::Unsupported(format!(
                "hidden variable models for {} parties",
                config.n
            )));
        }
        if subensembles
            .iter()
            .any(|s| s.weight < 0.0 || !s.weight.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "negative or non-finite weight".into(),
            ));
        }
        let total: f64 = subensembles.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        for s in &subensembles {
            if s.tuples.len() != 6 {
                return Err(Error::InvalidDistribution(format!(
                    "{} setting tuples, expected 6",
                    s.tuples.len()
                )));
            }
            for t in &s.tuples {
                l_coefficients(&t.probs)?;
            }
        }
        Ok(Self {
            config,
            seed: None,
            subensembles,
        })
    }

    /// Largest `|L_A - u.a|` over subensembles and setting tuples.
    pub fn malus_residual(&self) -> f64 {
        let dirs = alice_directions(&self.config);
        self.subensembles
            .iter()
            .flat_map(|s| {
                s.tuples
                    .iter()
                    .zip(&dirs)
                    .map(move |(t, a)| (t.l().a - s.u.dot(a)).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Largest change of `L_B`, `L_C` or `L_BC` between `(a_i, b_i, c_i)` and
    /// `(a'_i, b_i, c_i)` within a subensemble.
    pub fn no_signaling_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.subensembles {
            for i in 0..3 {
                let (x, y) = (s.tuples[2 * i].l(), s.tuples[2 * i + 1].l());
                worst = worst
                    .max((x.b - y.b).abs())
                    .max((x.c - y.c).abs())
                    .max((x.bc - y.bc).abs());
            }
        }
        worst
    }
}

/// Alice's direction for each of the six tuples, in `Q` order.
fn alice_directions(config: &MeasurementConfig) -> [BlochVector; 6] {
    let r = config.resolve_unchecked();
    std::array::from_fn(|t| r.tuples[t][0])
}

fn uniform_direction(rng: &mut impl Rng) -> BlochVector {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    BlochVector::normalized([x, y, z]).expect("unit sphere sample")
}

/// Uniform draw of `(L_B, L_C, L_BC)` from the two-party correlation
/// polytope, by rejection from the cube.
fn sample_two_party(rng: &mut impl Rng) -> (f64, f64, f64) {
    loop {
        let (b, c, bc) = (
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let ok = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .all(|&(be, ga): &(f64, f64)| 1.0 + be * b + ga * c + be * ga * bc >= 0.0);
        if ok {
            return (b, c, bc);
        }
    }
}

fn draw_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Completes `(L_A; L_B, L_C, L_BC)` with `(L_AB, L_AC, L_ABC)` drawn
/// uniformly from the feasible region, by rejection inside the box given by
/// the pairwise and step-inequality bounds. Falls back to the product
/// completion `L_AB = L_A L_B` etc., which is always feasible.
fn complete_with_alice(
    rng: &mut impl Rng,
    a: f64,
    (b, c, bc): (f64, f64, f64),
) -> (LCoefficients, bool) {
    let ab_range = ((a + b).abs() - 1.0, 1.0 - (a - b).abs());
    let ac_range = ((a + c).abs() - 1.0, 1.0 - (a - c).abs());
    let abc_range = ((a + bc).abs() - 1.0, 1.0 - (a - bc).abs());
    for _ in 0..MAX_REJECTION_TRIES {
        let l = LCoefficients {
            a,
            b,
            c,
            ab: draw_in(rng, ab_range.0, ab_range.1),
            ac: draw_in(rng, ac_range.0, ac_range.1),
            bc,
            abc: draw_in(rng, abc_range.0, abc_range.1),
        };
        if check_positivity(&l).iter().all(|&r| r >= 0.0) {
            return (l, true);
        }
    }
    (
        LCoefficients {
            a,
            b,
            c,
            ab: a * b,
            ac: a * c,
            bc,
            abc: a * bc,
        },
        false,
    )
}

fn to_probs(l: &LCoefficients) -> [f64; 8] {
    // residuals are nonnegative up to rounding; clamp and renormalize
    let mut p = l.probabilities().map(|x| x.max(0.0));
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Two subensemble conditionals for `(a, b, c)` and `(a', b, c)` sharing
/// `L_B`, `L_C`, `L_BC`, with `L_A = u.a` and `u.a'` respectively.
pub fn sample_malus_pair(
    rng: &mut impl Rng,
    u_dot_a: f64,
    u_dot_a_prime: f64,
) -> (LCoefficients, LCoefficients) {
    let shared = sample_two_party(rng);
    let (first, _) = complete_with_alice(rng, u_dot_a, shared);
    let (second, _) = complete_with_alice(rng, u_dot_a_prime, shared);
    (first, second)
}

/// Draws one subensemble with polarizations `(u, v, s)` for every setting
/// tuple of `config`.
pub fn sample_subensemble(
    rng: &mut impl Rng,
    config: &MeasurementConfig,
    (u, v, s): (BlochVector, BlochVector, BlochVector),
    variant: ModelVariant,
    weight: f64,
) -> Subensemble {
    let r = config.resolve_unchecked();
    let mut tuples = Vec::with_capacity(6);
    for i in 0..3 {
        let (t, tp) = (&r.tuples[2 * i], &r.tuples[2 * i + 1]);
        let (ua, uap) = (u.dot(&t[0]), u.dot(&tp[0]));
        let (l, lp) = match variant {
            ModelVariant::Product => {
                let (vb, sc) = (v.dot(&t[1]), s.dot(&t[2]));
                let product = |a: f64| LCoefficients {
                    a,
                    b: vb,
                    c: sc,
                    ab: a * vb,
                    ac: a * sc,
                    bc: vb * sc,
                    abc: a * vb * sc,
                };
                (product(ua), product(uap))
            }
            ModelVariant::General => sample_malus_pair(rng, ua, uap),
        };
        tuples.push(SubensembleDistribution {
            u,
            v,
            s,
            probs: to_probs(&l),
        });
        tuples.push(SubensembleDistribution {
            u,
            v,
            s,
            probs: to_probs(&lp),
        });
    }
    Subensemble {
        weight,
        u,
        v,
        s,
        tuples,
    }
}

/// [`sample_leggett_model_with`] using [`SamplerOptions::default`].
pub fn sample_leggett_model(config: &MeasurementConfig, seed: u64) -> Result<EnsembleModel> {
    sample_leggett_model_with(config, seed, &SamplerOptions::default())
}

/// Draws a random finite Leggett model for a three-party configuration.
/// Reproducible from `seed`.
pub fn sample_leggett_model_with(
    config: &MeasurementConfig,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<EnsembleModel> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    if config.n != 3 {
        return Err(Error::Unsupported(format!(
            "hidden variable models for {} parties",
            config.n
        )));
    }
    if opts.subensembles == 0 {
        return Err(Error::InvalidDistribution(
            "at least one subensemble required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..opts.subensembles)
        .map(|_| Exp1.sample(&mut rng))
        .collect();
    let total: f64 = raw.iter().sum();
    let subensembles = raw
        .iter()
        .map(|w| {
            let u = uniform_direction(&mut rng);
            let (v, s) = match opts.coupling {
                PolarizationCoupling::Independent => {
                    (uniform_direction(&mut rng), uniform_direction(&mut rng))
                }
                PolarizationCoupling::Aligned => (u, u),
            };
            sample_subensemble(&mut rng, config, (u, v, s), opts.variant, w / total)
        })
        .collect();
    Ok(EnsembleModel {
        config: config.clone(),
        seed: Some(seed),
        subensembles,
    })
}

/// Inequality value of a model: each `Q` is the weight average of `L_ABC`.
pub fn model_inequality_value(
    model: &EnsembleModel,
    config: &MeasurementConfig,
) -> Result<InequalityReport> {
    if &model.config != config {
        return Err(Error::ModelConfigMismatch);
    }
    let mut q = [0.0; 6];
    for s in &model.subensembles {
        for (slot, t) in q.iter_mut().zip(&s.tuples) {
            *slot += s.weight * t.l().abc;
        }
    }
    Ok(InequalityReport::from_correlations(config.theta, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlhv::{check_step_inequality, check_triangle_step, vertex};
    use crate::optimal_theta;
    use crate::settings::{parametrized_config, reference_settings, SettingsParams};

    #[test]
    fn models_are_reproducible() {
        let cfg = reference_settings(optimal_theta()).unwrap();
        let a = sample_leggett_model(&cfg, 5).unwrap();
        let b = sample_leggett_model(&cfg, 5).unwrap();
        let c = sample_leggett_model(&cfg, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.subensembles.len(), 64);
        assert_eq!(a.seed, Some(5));
    }

    #[test]
    fn sampled_models_obey_constraints() {
        let cfg = reference_settings(1.1).unwrap();
        for seed in 0..50 {
            let m = sample_leggett_model(&cfg, seed).unwrap();
            assert!(m.malus_residual() < 1e-9);
            assert!(m.no_signaling_residual() < 1e-12);
            let w: f64 = m.subensembles.iter().map(|s| s.weight).sum();
            assert!((w - 1.0).abs() < 1e-12);
            for s in &m.subensembles {
                for t in &s.tuples {
                    assert!(t.probs.iter().all(|&p| p >= 0.0));
                    assert!(check_step_inequality(&t.l()));
                }
            }
            assert!(model_inequality_value(&m, &cfg).unwrap().total <= 6.0 + 1e-9);
        }
    }

    #[test]
    fn product_variant_factorizes() {
        let cfg = reference_settings(0.8).unwrap();
        let opts = SamplerOptions {
            subensembles: 16,
            variant: ModelVariant::Product,
            ..Default::default()
        };
        let m = sample_leggett_model_with(&cfg, 3, &opts).unwrap();
        let r = cfg.resolve().unwrap();
        let report = model_inequality_value(&m, &cfg).unwrap();
        for (t, q) in report.q_terms.iter().enumerate() {
            let d = &r.tuples[t];
            let expected: f64 = m
                .subensembles
                .iter()
                .map(|s| s.weight * s.u.dot(&d[0]) * s.v.dot(&d[1]) * s.s.dot(&d[2]))
                .sum();
            assert!((q.get() - expected).abs() < 1e-12);
        }
        assert!(m.malus_residual() < 1e-9);
    }

    #[test]
    fn alice_aligned_with_polarization_is_deterministic() {
        let cfg = reference_settings(0.8).unwrap();
        let a1 = BlochVector::normalized(cfg.alice_pairs[0].0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sub = sample_subensemble(
            &mut rng,
            &cfg,
            (a1, BlochVector::X, BlochVector::Y),
            ModelVariant::General,
            1.0,
        );
        let d = &sub.tuples[0];
        assert!((d.l().a - 1.0).abs() < 1e-12);
        // alpha = -1 outcomes carry no mass
        assert!(d.probs[4..].iter().all(|&p| p.abs() < 1e-12));
    }

    #[test]
    fn deterministic_all_plus_model_meets_bound() {
        let cfg = reference_settings(0.0).unwrap();
        let dist = SubensembleDistribution {
            u: BlochVector::X,
            v: BlochVector::X,
            s: BlochVector::X,
            probs: vertex(0),
        };
        let sub = Subensemble {
            weight: 1.0,
            u: BlochVector::X,
            v: BlochVector::X,
            s: BlochVector::X,
            tuples: vec![dist; 6],
        };
        let m = EnsembleModel::new(cfg.clone(), vec![sub]).unwrap();
        let r = model_inequality_value(&m, &cfg).unwrap();
        assert_eq!(r.total, 6.0);
        assert_eq!(r.violation, 0.0);
    }

    #[test]
    fn uniform_model_has_only_theta_term() {
        let theta = 1.3;
        let cfg = reference_settings(theta).unwrap();
        let dist = SubensembleDistribution {
            u: BlochVector::X,
            v: BlochVector::X,
            s: BlochVector::X,
            probs: [0.125; 8],
        };
        let sub = Subensemble {
            weight: 1.0,
            u: BlochVector::X,
            v: BlochVector::X,
            s: BlochVector::X,
            tuples: vec![dist; 6],
        };
        let m = EnsembleModel::new(cfg.clone(), vec![sub]).unwrap();
        let r = model_inequality_value(&m, &cfg).unwrap();
        assert!((r.total - 2.0 * (theta / 2.0).sin()).abs() < 1e-15);
        assert!(r.total <= 2.0);
    }

    #[test]
    fn model_config_mismatch() {
        let cfg = reference_settings(0.5).unwrap();
        let m = sample_leggett_model(&cfg, 1).unwrap();
        assert!(matches!(
            model_inequality_value(&m, &reference_settings(0.6).unwrap()),
            Err(Error::ModelConfigMismatch)
        ));
    }

    #[test]
    fn four_party_models_unsupported() {
        let cfg = crate::settings::ghz_optimal_settings(4, 0.5).unwrap();
        assert!(matches!(
            sample_leggett_model(&cfg, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn malus_pairs_satisfy_triangle_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20_000 {
            let u = uniform_direction(&mut rng);
            let a = uniform_direction(&mut rng);
            let ap = uniform_direction(&mut rng);
            let (l, lp) = sample_malus_pair(&mut rng, u.dot(&a), u.dot(&ap));
            assert!(check_triangle_step((l.abc, lp.abc), &u, &a, &ap));
        }
    }

    #[test]
    fn random_configs_respect_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..200 {
            let p: Vec<f64> = (0..SettingsParams::len_for(3))
                .map(|_| rng.random_range(-4.0..4.0))
                .collect();
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let cfg = parametrized_config(3, theta, &SettingsParams::from_slice(3, &p)).unwrap();
            let opts = SamplerOptions {
                subensembles: 8,
                variant: if seed % 2 == 0 {
                    ModelVariant::General
                } else {
                    ModelVariant::Product
                },
                coupling: if seed % 3 == 0 {
                    PolarizationCoupling::Aligned
                } else {
                    PolarizationCoupling::Independent
                },
            };
            let m = sample_leggett_model_with(&cfg, seed, &opts).unwrap();
            assert!(model_inequality_value(&m, &cfg).unwrap().total <= 6.0 + 1e-9);
        }
    }
}

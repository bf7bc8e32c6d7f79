//! The fixed arithmetic context of the construction.
//!
//! A [`TowerParams`] bundles the base data zeta, eta, the evaluation point t,
//! the uniformizer-side quantities T and T^sigma, the sign-normalization root
//! nu with nu^(q+1) = -1/((t - zeta)(t^q - zeta)), the coordinates
//! x = 1/((t - zeta)(t - zeta^q)) and y = t x, and the coefficients of the
//! degree-two element z_eta = c_x x + c_y y + 1.
//!
//! In reduced mode t = eta in F_{q^2}; in specialized mode t is a free point
//! of an ambient F_{q^(4m)}, used to check polynomial identities by exact
//! evaluation. The sigma-action fixes t and maps zeta to zeta^q; on nu it is
//! the declared rule nu^sigma = T^(1-q) nu^q = -x/nu, not the ambient
//! Frobenius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ff::{self, is_prime, Field, FieldElement};

/// Whether t is specialized to eta (reduced) or kept free in an ambient field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reduced,
    Specialized,
}

/// User-facing configuration, also the unit serialized into output digests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub p: u64,
    pub q_exponent: usize,
    /// Optional modulus for F_{q^2}; zeta is its canonical generator.
    #[serde(default)]
    pub zeta_modulus: Option<Vec<u64>>,
    /// eta as coefficients over F_p in the F_{q^2} basis.
    #[serde(default)]
    pub eta: Option<Vec<u64>>,
    pub mode: Mode,
    /// Explicit specialization point (coefficients in the starting ambient).
    #[serde(default)]
    pub t_point: Option<Vec<u64>>,
    pub seed: u64,
    /// Starting ambient exponent m (ambient = F_{q^(4m)}); default 1, so nu
    /// is taken from the smallest ambient that contains one.
    #[serde(default)]
    pub ambient_exponent: Option<usize>,
}

impl ParamsConfig {
    /// The standard q = 3 reduced context: zeta = g (g^2 = -1), eta = 1 + 2g.
    pub fn q3_reduced(seed: u64) -> ParamsConfig {
        ParamsConfig {
            p: 3,
            q_exponent: 1,
            zeta_modulus: None,
            eta: Some(vec![1, 2]),
            mode: Mode::Reduced,
            t_point: None,
            seed,
            ambient_exponent: None,
        }
    }

    pub fn specialized(p: u64, q_exponent: usize, seed: u64) -> ParamsConfig {
        ParamsConfig {
            p,
            q_exponent,
            zeta_modulus: None,
            eta: None,
            mode: Mode::Specialized,
            t_point: None,
            seed,
            ambient_exponent: None,
        }
    }
}

/// Constants feeding the model builders at a fixed twist level k. The
/// reduced F_{q^4} context provides the same shape with `nu_k` absent.
#[derive(Clone)]
pub(crate) struct ModelConsts {
    pub field: Field,
    pub e: usize,
    pub q: u64,
    /// zeta^(q^k)
    pub zeta_k: FieldElement,
    /// zeta^(q^(k+1))
    pub zeta_k1: FieldElement,
    /// T^(sigma^k) = 1/(t - zeta^(q^(k+1)))
    pub t_k: FieldElement,
    /// T^(sigma^(k+1)) = 1/(t - zeta^(q^k))
    pub t_k1: FieldElement,
    pub x: FieldElement,
    pub y: FieldElement,
    /// nu^(sigma^k); absent in the nu-free reduced context
    pub nu_k: Option<FieldElement>,
}

/// The built arithmetic context. Immutable and shareable.
#[derive(Clone)]
pub struct TowerParams {
    cfg: ParamsConfig,
    p: u64,
    e: usize,
    q: u64,
    fq: Field,
    fq2: Field,
    fq4: Field,
    ambient: Field,
    ambient_m: usize,
    mode: Mode,
    zeta2: FieldElement,
    eta2: Option<FieldElement>,
    zeta: FieldElement,
    zeta_q: FieldElement,
    eta: Option<FieldElement>,
    t: FieldElement,
    nu: FieldElement,
    nu_sigma: FieldElement,
    big_t: FieldElement,
    big_t_sigma: FieldElement,
    x_val: FieldElement,
    y_val: FieldElement,
    /// z_eta = z_coeff_x * x + z_coeff_y * y + 1, coefficients in F_{q^2}.
    z_coeff_x: Option<FieldElement>,
    z_coeff_y: Option<FieldElement>,
}

impl TowerParams {
    pub fn build(cfg: &ParamsConfig) -> Result<TowerParams> {
        let p = cfg.p;
        if !is_prime(p) {
            return Err(Error::CompositeModulus { p });
        }
        let e = cfg.q_exponent;
        if e == 0 {
            return Err(Error::InvalidConfig {
                field: "q_exponent",
                reason: "must be >= 1".into(),
            });
        }
        let q = (0..e).try_fold(1u64, |acc, _| acc.checked_mul(p)).ok_or(
            Error::InvalidConfig {
                field: "q_exponent",
                reason: "q overflows".into(),
            },
        )?;
        let fq = Field::new(p, e)?;
        let fq2 = match &cfg.zeta_modulus {
            Some(m) => {
                if m.len() != 2 * e + 1 {
                    return Err(Error::InvalidConfig {
                        field: "zeta_modulus",
                        reason: format!("must have degree {}", 2 * e),
                    });
                }
                Field::with_modulus(p, m)?
            }
            None => Field::new(p, 2 * e)?,
        };
        let fq4 = Field::new(p, 4 * e)?;
        let zeta2 = fq2.generator();
        let zeta2_q = zeta2.frq(e, 1);

        let eta2 = match (&cfg.mode, &cfg.eta) {
            (Mode::Reduced, None) => {
                return Err(Error::InvalidConfig {
                    field: "eta",
                    reason: "required in reduced mode".into(),
                })
            }
            (_, Some(coeffs)) => {
                if q == 2 && cfg.mode == Mode::Reduced {
                    return Err(Error::NoValidEta { q });
                }
                if coeffs.len() > 2 * e {
                    return Err(Error::InvalidConfig {
                        field: "eta",
                        reason: "too many coefficients for F_{q^2}".into(),
                    });
                }
                let eta = fq2.from_coeffs(coeffs);
                if eta.frq(e, 1) == eta {
                    return Err(Error::InvalidConfig {
                        field: "eta",
                        reason: "eta lies in F_q".into(),
                    });
                }
                if eta == zeta2 || eta == zeta2_q {
                    return Err(Error::InvalidConfig {
                        field: "eta",
                        reason: "eta collides with zeta or zeta^q".into(),
                    });
                }
                Some(eta)
            }
            (Mode::Specialized, None) => None,
        };

        let m_start = cfg.ambient_exponent.unwrap_or(1);
        let cap = (q + 1) as usize;
        if m_start == 0 || m_start > cap {
            return Err(Error::InvalidConfig {
                field: "ambient_exponent",
                reason: format!("must lie in 1..={cap}"),
            });
        }

        let mut found: Option<(Field, usize, FieldElement, FieldElement)> = None;
        for m in m_start..=cap {
            let ambient = match Field::new(p, 4 * e * m) {
                Ok(f) => f,
                Err(Error::BoundExceeded { .. }) => break,
                Err(e) => return Err(e),
            };
            let zeta_a = ff::embed(&zeta2, &ambient)?;
            let zeta_qa = zeta_a.pow(q as u128);
            let mut candidates: Vec<FieldElement> = vec![];
            match cfg.mode {
                Mode::Reduced => {
                    candidates.push(ff::embed(eta2.as_ref().unwrap(), &ambient)?);
                }
                Mode::Specialized => {
                    if let Some(tp) = &cfg.t_point {
                        if m != m_start {
                            break; // an explicit point cannot be transported
                        }
                        if tp.len() > ambient.degree() {
                            return Err(Error::InvalidConfig {
                                field: "t_point",
                                reason: "too many coefficients for the ambient".into(),
                            });
                        }
                        candidates.push(ambient.from_coeffs(tp));
                    } else {
                        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ (m as u64));
                        let order = ambient.order();
                        for _ in 0..200 * (q as usize + 1) {
                            let idx = (rng.gen::<u64>() as u128) % order;
                            candidates.push(ambient.from_index(idx));
                        }
                    }
                }
            }
            'cand: for t in candidates {
                if t == zeta_a || t == zeta_qa {
                    continue 'cand;
                }
                let d1 = &t - &zeta_a;
                let d2 = &t.pow(q as u128) - &zeta_a;
                if d1.is_zero() || d2.is_zero() {
                    continue 'cand;
                }
                let target = -&(&d1 * &d2).inverse()?;
                let roots = match ff::nth_roots(&target, q + 1) {
                    Ok(r) => r,
                    Err(Error::BoundExceeded { .. }) => break,
                    Err(e) => return Err(e),
                };
                if let Some(nu) = roots.into_iter().next() {
                    found = Some((ambient.clone(), m, t, nu));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        let (ambient, ambient_m, t, nu) = found.ok_or(Error::NuNotFound { cap })?;

        let zeta = ff::embed(&zeta2, &ambient)?;
        let zeta_q = zeta.pow(q as u128);
        let eta = eta2
            .as_ref()
            .map(|h| ff::embed(h, &ambient))
            .transpose()?;
        let big_t = (&t - &zeta_q).inverse()?;
        let big_t_sigma = (&t - &zeta).inverse()?;
        let x_val = &big_t * &big_t_sigma;
        let y_val = &t * &x_val;
        let nu_sigma = &(&big_t / &big_t.pow(q as u128)) * &nu.pow(q as u128);

        // structural identities of the context
        let tq = t.pow(q as u128);
        assert!(
            (&(&nu.pow(q as u128 + 1) * &(&(&t - &zeta) * &(&tq - &zeta))) + &ambient.one())
                .is_zero(),
            "nu relation failed"
        );
        assert_eq!(&big_t * &(&t - &zeta_q), ambient.one());
        assert_eq!(&big_t_sigma * &(&t - &zeta), ambient.one());
        assert_eq!(nu_sigma, -&(&x_val / &nu), "two forms of nu^sigma disagree");

        let (z_coeff_x, z_coeff_y) = if let Some(h) = &eta2 {
            let hq = h.frq(e, 1);
            let zeta_pow = &zeta2 * &zeta2_q;
            let cx = &(h * &hq) - &zeta_pow;
            let cy = -&(&(h + &hq) - &(&zeta2 + &zeta2_q));
            (Some(cx), Some(cy))
        } else {
            (None, None)
        };

        Ok(TowerParams {
            cfg: cfg.clone(),
            p,
            e,
            q,
            fq,
            fq2,
            fq4,
            ambient,
            ambient_m,
            mode: cfg.mode,
            zeta2,
            eta2,
            zeta,
            zeta_q,
            eta,
            t,
            nu,
            nu_sigma,
            big_t,
            big_t_sigma,
            x_val,
            y_val,
            z_coeff_x,
            z_coeff_y,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Twist exponent e with q = p^e.
    pub fn e(&self) -> usize {
        self.e
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }
    pub fn config(&self) -> &ParamsConfig {
        &self.cfg
    }
    pub fn fq(&self) -> &Field {
        &self.fq
    }
    pub fn fq2(&self) -> &Field {
        &self.fq2
    }
    pub fn fq4(&self) -> &Field {
        &self.fq4
    }
    pub fn ambient(&self) -> &Field {
        &self.ambient
    }
    /// Ambient exponent m: ambient = F_{q^(4m)}.
    pub fn ambient_m(&self) -> usize {
        self.ambient_m
    }
    /// zeta as an element of F_{q^2}.
    pub fn zeta_fq2(&self) -> &FieldElement {
        &self.zeta2
    }
    pub fn eta_fq2(&self) -> Option<&FieldElement> {
        self.eta2.as_ref()
    }
    /// zeta embedded in the ambient field.
    pub fn zeta(&self) -> &FieldElement {
        &self.zeta
    }
    pub fn zeta_q(&self) -> &FieldElement {
        &self.zeta_q
    }
    pub fn eta(&self) -> Option<&FieldElement> {
        self.eta.as_ref()
    }
    /// The evaluation point (eta in reduced mode).
    pub fn t(&self) -> &FieldElement {
        &self.t
    }
    pub fn nu(&self) -> &FieldElement {
        &self.nu
    }
    /// T = 1/(t - zeta^q).
    pub fn big_t(&self) -> &FieldElement {
        &self.big_t
    }
    /// T^sigma = 1/(t - zeta).
    pub fn big_t_sigma(&self) -> &FieldElement {
        &self.big_t_sigma
    }
    /// x = 1/((t - zeta)(t - zeta^q)).
    pub fn x_val(&self) -> &FieldElement {
        &self.x_val
    }
    /// y = t x.
    pub fn y_val(&self) -> &FieldElement {
        &self.y_val
    }
    /// Coefficients (c_x, c_y) with z_eta = c_x x + c_y y + 1, in F_{q^2}.
    pub fn z_coeffs(&self) -> Option<(&FieldElement, &FieldElement)> {
        Some((self.z_coeff_x.as_ref()?, self.z_coeff_y.as_ref()?))
    }

    /// zeta^(q^k) in the ambient (period two in k).
    pub fn zeta_pow_qk(&self, k: usize) -> &FieldElement {
        if k % 2 == 0 {
            &self.zeta
        } else {
            &self.zeta_q
        }
    }

    /// T^(sigma^k) = 1/(t - zeta^(q^(k+1))).
    pub fn t_sigma_pow(&self, k: usize) -> &FieldElement {
        if k % 2 == 0 {
            &self.big_t
        } else {
            &self.big_t_sigma
        }
    }

    /// nu^(sigma^k); nu^sigma = T^(1-q) nu^q = -x/nu.
    pub fn nu_sigma_pow(&self, k: usize) -> &FieldElement {
        if k % 2 == 0 {
            &self.nu
        } else {
            &self.nu_sigma
        }
    }

    /// The sigma-action on F_{q^2} data: the q-power Frobenius.
    pub fn sigma_fq2(&self, a: &FieldElement) -> FieldElement {
        assert!(a.field() == &self.fq2, "sigma_fq2 expects F_{{q^2}} data");
        a.frq(self.e, 1)
    }

    /// Embeds an element of a subfield into the ambient field.
    pub fn to_ambient(&self, a: &FieldElement) -> Result<FieldElement> {
        ff::embed(a, &self.ambient)
    }

    /// All admissible nu choices (the M_mu orbit) in canonical order.
    pub fn nu_candidates(&self) -> Result<Vec<FieldElement>> {
        let tq = self.t.pow(self.q as u128);
        let target = -&(&(&self.t - &self.zeta) * &(&tq - &self.zeta)).inverse()?;
        ff::nth_roots(&target, self.q + 1)
    }

    /// Rebuilds the same context with a specific nu from the M_mu orbit.
    pub fn with_nu(&self, nu: FieldElement) -> Result<TowerParams> {
        let cands = self.nu_candidates()?;
        if !cands.contains(&nu) {
            return Err(Error::InvalidConfig {
                field: "nu",
                reason: "not a (q+1)-th root of the nu target".into(),
            });
        }
        let mut out = self.clone();
        out.nu_sigma = &(&self.big_t / &self.big_t.pow(self.q as u128)) * &nu.pow(self.q as u128);
        out.nu = nu;
        Ok(out)
    }

    /// SHA-256 digest of the context (hex), for output provenance.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Desc<'a> {
            p: u64,
            e: usize,
            fq2_modulus: &'a [u64],
            eta: Option<&'a [u64]>,
            mode: Mode,
            t: &'a [u64],
            ambient_m: usize,
            nu: &'a [u64],
            seed: u64,
        }
        let desc = Desc {
            p: self.p,
            e: self.e,
            fq2_modulus: self.fq2.modulus(),
            eta: self.eta2.as_ref().map(|h| h.coeffs()),
            mode: self.mode,
            t: self.t.coeffs(),
            ambient_m: self.ambient_m,
            nu: self.nu.coeffs(),
            seed: self.cfg.seed,
        };
        let json = serde_json::to_vec(&desc).expect("digest serialization");
        let mut hasher = Sha256::new();
        hasher.update(&json);
        hex::encode(hasher.finalize())
    }

    pub(crate) fn model_consts(&self, k: usize) -> ModelConsts {
        ModelConsts {
            field: self.ambient.clone(),
            e: self.e,
            q: self.q,
            zeta_k: self.zeta_pow_qk(k).clone(),
            zeta_k1: self.zeta_pow_qk(k + 1).clone(),
            t_k: self.t_sigma_pow(k).clone(),
            t_k1: self.t_sigma_pow(k + 1).clone(),
            x: self.x_val.clone(),
            y: self.y_val.clone(),
            nu_k: Some(self.nu_sigma_pow(k).clone()),
        }
    }

    /// The nu-free F_{q^4} view used by the reduced-tower enumeration.
    pub fn reduced_ctx(&self) -> Result<ReducedCtx> {
        if self.mode != Mode::Reduced {
            return Err(Error::InvalidConfig {
                field: "mode",
                reason: "reduced_ctx requires reduced mode".into(),
            });
        }
        let fq4 = self.fq4.clone();
        let zeta = ff::embed(&self.zeta2, &fq4)?;
        let eta = ff::embed(self.eta2.as_ref().unwrap(), &fq4)?;
        Ok(ReducedCtx {
            e: self.e,
            q: self.q,
            zeta_q: zeta.pow(self.q as u128),
            zeta,
            eta,
            fq4,
        })
    }
}

/// F_{q^4}-level constants for the reduced tower (no nu needed).
#[derive(Clone)]
pub struct ReducedCtx {
    pub(crate) fq4: Field,
    pub(crate) e: usize,
    pub(crate) q: u64,
    pub(crate) zeta: FieldElement,
    pub(crate) zeta_q: FieldElement,
    pub(crate) eta: FieldElement,
}

impl ReducedCtx {
    pub fn fq4(&self) -> &Field {
        &self.fq4
    }
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn zeta_pow_qk(&self, k: usize) -> &FieldElement {
        if k % 2 == 0 {
            &self.zeta
        } else {
            &self.zeta_q
        }
    }

    /// T^(sigma^k) = 1/(eta - zeta^(q^(k+1))) inside F_{q^4}.
    pub fn t_sigma_pow(&self, k: usize) -> FieldElement {
        (&self.eta - self.zeta_pow_qk(k + 1)).inverse().expect("eta != zeta conjugates")
    }

    pub fn x_val(&self) -> FieldElement {
        (&(&self.eta - &self.zeta) * &(&self.eta - &self.zeta_q))
            .inverse()
            .expect("eta != zeta conjugates")
    }

    pub fn y_val(&self) -> FieldElement {
        &self.eta * &self.x_val()
    }

    pub(crate) fn model_consts(&self, k: usize) -> ModelConsts {
        ModelConsts {
            field: self.fq4.clone(),
            e: self.e,
            q: self.q,
            zeta_k: self.zeta_pow_qk(k).clone(),
            zeta_k1: self.zeta_pow_qk(k + 1).clone(),
            t_k: self.t_sigma_pow(k),
            t_k1: self.t_sigma_pow(k + 1),
            x: self.x_val(),
            y: self.y_val(),
            nu_k: None,
        }
    }
}

//! The I_eta-reduced tower over F_{q^4}: supersingular j-set, level-by-level
//! point enumeration, and the epsilon/kappa/genus/Ihara analytics.
//!
//! Everything here is nu-free: the reduced minimal model and the w-recursions
//! close inside F_{q^4}, so scans run over the small field directly.

use num::One;
use num::rational::Ratio;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{self, FieldElement};
use crate::modules;
use crate::params::{ReducedCtx, TowerParams};
use crate::recursion::{
    cap_xi_eval_with, cap_xi_nabla_eval_with, cap_xi_roots_with, level_consts_reduced,
    next_j_with, w_nabla_with,
};
use crate::skew::SkewPoly;

// ---------------------------------------------------------------------------
// Supersingular locus.
// ---------------------------------------------------------------------------

/// Outcome of the supersingular scan, carrying both displayed criteria for
/// cross-checking. The direct tau^2-coefficient of the expanded z_eta image
/// is authoritative.
#[derive(Debug, Clone, Serialize)]
pub struct SupersingularScan {
    /// j in F_{q^4} with vanishing tau^2-coefficient (the authoritative set).
    pub direct_set: Vec<FieldElement>,
    /// Zero locus of the unsimplified criterion from the direct expansion.
    pub proof_display_set: Vec<FieldElement>,
    /// Zero locus of the simplified printed criterion.
    pub simplified_display_set: Vec<FieldElement>,
    pub direct_matches_proof_display: bool,
    pub simplified_matches_direct: bool,
    /// Every member of the direct set satisfies j^(q^2) = j.
    pub all_in_fq2: bool,
    pub anomalies: Vec<String>,
}

/// The authoritative supersingular j-set in F_{q^4} (canonically ordered).
pub fn supersingular_j_set(params: &TowerParams) -> Result<Vec<FieldElement>> {
    Ok(supersingular_scan(params)?.direct_set)
}

/// Scans all j in F_{q^4}^* with all three criteria.
pub fn supersingular_scan(params: &TowerParams) -> Result<SupersingularScan> {
    let ctx = params.reduced_ctx()?;
    let fq4 = ctx.fq4().clone();
    let q = ctx.q();
    let e = params.e();
    let one = fq4.one();
    let (cx2, cy2) = params
        .z_coeffs()
        .ok_or_else(|| Error::InvalidConfig {
            field: "eta",
            reason: "supersingular scan requires eta".into(),
        })?;
    let cx = ff::embed(cx2, &fq4)?;
    let cy = ff::embed(cy2, &fq4)?;
    let zeta = ctx.zeta_pow_qk(0).clone();
    let zeta_q = ctx.zeta_pow_qk(1).clone();
    let eta = ff::embed(params.eta_fq2().unwrap(), &fq4)?;
    let eta_q = eta.pow(q as u128);

    // proof display: (j/(1 - zeta^(1-q)) + eta zeta^(-1) - 1)^(q+1)
    //              + (zeta^(-1) - zeta^(-q))(eta - eta^q)
    let zr = &zeta / &zeta_q;
    let proof_crit = |j: &FieldElement| -> FieldElement {
        let head = &(&(j / &(&one - &zr)) + &(&eta / &zeta)) - &one;
        let tail = &(&zeta.inverse().unwrap() - &zeta_q.inverse().unwrap()) * &(&eta - &eta_q);
        &head.pow(q as u128 + 1) + &tail
    };
    // simplified display: (j + (eta - zeta)/(zeta - zeta^(1-q)))^(q+1)
    //                   + (eta - eta^q)/(zeta - zeta^q)
    let simpl_crit = |j: &FieldElement| -> FieldElement {
        let center = &(&eta - &zeta) / &(&zeta - &zr);
        let tail = &(&eta - &eta_q) / &(&zeta - &zeta_q);
        &(j + &center).pow(q as u128 + 1) + &tail
    };

    if proof_crit(&fq4.zero()).is_zero() {
        return Err(Error::DegenerateEta);
    }

    let mconsts = ctx.model_consts(0);
    let mut anomalies = vec![];
    let mut direct_set = vec![];
    let mut proof_set = vec![];
    let mut simpl_set = vec![];
    for j in fq4.elements() {
        if !j.is_zero() {
            let (phi_x, phi_y) = modules::minimal_parts(&mconsts, &j)?;
            let mut z = phi_x.scale_left(&cx).add(&phi_y.scale_left(&cy));
            z = z.add(&SkewPoly::one(&fq4, e));
            // the z_eta image must start at tau^2: constant and tau terms die
            if !z.coeff(0).is_zero() || !z.coeff(1).is_zero() {
                anomalies.push(format!(
                    "z_eta image has nonzero low coefficients at j = {j}"
                ));
            }
            if z.coeff(2).is_zero() {
                if z.coeff(4).is_zero() {
                    anomalies.push(format!("tau^4 coefficient vanished at j = {j}"));
                }
                direct_set.push(j.clone());
                if !z.coeff(3).is_zero() {
                    anomalies.push(format!(
                        "supersingular j = {j} has nonzero tau^3 coefficient"
                    ));
                }
            }
            if proof_crit(&j).is_zero() {
                proof_set.push(j.clone());
            }
        }
        if simpl_crit(&j).is_zero() {
            simpl_set.push(j.clone());
        }
    }
    let all_in_fq2 = direct_set.iter().all(|j| j.pow((q as u128).pow(2)) == *j);
    if direct_set.len() as u64 != q + 1 {
        anomalies.push(format!(
            "expected q+1 = {} supersingular j-values, found {}",
            q + 1,
            direct_set.len()
        ));
    }
    Ok(SupersingularScan {
        direct_matches_proof_display: direct_set == proof_set,
        simplified_matches_direct: simpl_set == direct_set,
        direct_set,
        proof_display_set: proof_set,
        simplified_display_set: simpl_set,
        all_in_fq2,
        anomalies,
    })
}

// ---------------------------------------------------------------------------
// Tower points and enumeration.
// ---------------------------------------------------------------------------

/// A point (j0, w_1..w_k) on the reduced tower, coordinates in F_{q^4}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TowerPoint {
    pub j0: FieldElement,
    pub ws: Vec<FieldElement>,
}

impl TowerPoint {
    pub fn level(&self) -> usize {
        self.ws.len()
    }
}

impl Serialize for TowerPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(1 + self.ws.len()))?;
        seq.serialize_element(&self.j0)?;
        for w in &self.ws {
            seq.serialize_element(w)?;
        }
        seq.end()
    }
}

/// Revalidates a point against the level equations, independently of how it
/// was produced: Xi = 0 at each level and the nabla exclusions hold.
pub fn validate_point(ctx: &ReducedCtx, point: &TowerPoint) -> std::result::Result<(), String> {
    if point.j0.is_zero() {
        return Err("j0 = 0".into());
    }
    let mut j_prev = point.j0.clone();
    for (idx, w) in point.ws.iter().enumerate() {
        let k = idx + 1;
        let c = level_consts_reduced(ctx, k);
        match cap_xi_eval_with(&c, &j_prev, w) {
            Ok(v) if v.is_zero() => {}
            Ok(_) => return Err(format!("level-{k} equation fails at w = {w}")),
            Err(e) => return Err(format!("level-{k} equation error: {e}")),
        }
        if idx > 0 {
            let cp = level_consts_reduced(ctx, k - 1);
            let excluded = w_nabla_with(&cp, &point.ws[idx - 1])
                .map_err(|e| format!("level-{k} nabla error: {e}"))?;
            if *w == excluded {
                return Err(format!("level-{k} hits the excluded nabla root"));
            }
            match cap_xi_nabla_eval_with(&cp, &point.ws[idx - 1], w) {
                Ok(v) if v.is_zero() => {}
                Ok(_) => return Err(format!("level-{k} nabla cofactor fails at w = {w}")),
                Err(e) => return Err(format!("level-{k} nabla cofactor error: {e}")),
            }
        }
        j_prev = next_j_with(&c, w).map_err(|e| format!("level-{k} j-update error: {e}"))?;
    }
    Ok(())
}

/// Extends each level-k point to all its level-(k+1) children: for k = 0 the
/// q+1 roots of the level-1 equation, afterwards the q roots of the nabla
/// cofactor. Invalid inputs contribute no children and a warning.
pub fn extend_points(
    params: &TowerParams,
    points: &[TowerPoint],
) -> Result<(Vec<TowerPoint>, Vec<String>)> {
    let ctx = params.reduced_ctx()?;
    extend_points_ctx(&ctx, points)
}

fn extend_points_ctx(
    ctx: &ReducedCtx,
    points: &[TowerPoint],
) -> Result<(Vec<TowerPoint>, Vec<String>)> {
    let q = ctx.q();
    let results: Vec<(Vec<TowerPoint>, Vec<String>)> = points
        .par_iter()
        .map(|pt| {
            let mut warnings = vec![];
            if let Err(w) = validate_point(ctx, pt) {
                warnings.push(format!("skipping invalid point: {w}"));
                return (vec![], warnings);
            }
            let k = pt.level();
            let children = if k == 0 {
                let c = level_consts_reduced(ctx, 1);
                match cap_xi_roots_with(&c, &pt.j0, ctx.fq4()) {
                    Ok(roots) => {
                        if roots.len() as u64 != q + 1 {
                            warnings.push(format!(
                                "level-1 fiber of j0 = {} has {} roots, expected {}",
                                pt.j0,
                                roots.len(),
                                q + 1
                            ));
                        }
                        roots
                    }
                    Err(e) => {
                        warnings.push(format!("level-1 fiber of j0 = {} failed: {e}", pt.j0));
                        vec![]
                    }
                }
            } else {
                let c = level_consts_reduced(ctx, k);
                let w_cur = pt.ws.last().unwrap();
                let j_cur = match next_j_with(&c, w_cur) {
                    Ok(j) => j,
                    Err(e) => {
                        warnings.push(format!("j-update failed: {e}"));
                        return (vec![], warnings);
                    }
                };
                let cn = level_consts_reduced(ctx, k + 1);
                let all = match cap_xi_roots_with(&cn, &j_cur, ctx.fq4()) {
                    Ok(r) => r,
                    Err(e) => {
                        warnings.push(format!("level-{} fiber failed: {e}", k + 1));
                        vec![]
                    }
                };
                let excluded = match w_nabla_with(&c, w_cur) {
                    Ok(x) => Some(x),
                    Err(e) => {
                        warnings.push(format!("nabla value undefined: {e} (multiplicity anomaly?)"));
                        None
                    }
                };
                let kept: Vec<FieldElement> = all
                    .into_iter()
                    .filter(|w| Some(w) != excluded.as_ref())
                    .collect();
                if kept.len() as u64 != q {
                    warnings.push(format!(
                        "level-{} fiber of {:?} has {} admissible roots, expected {}",
                        k + 1,
                        pt.ws,
                        kept.len(),
                        q
                    ));
                }
                // cross-check: every kept root kills the nabla cofactor
                for w in &kept {
                    match cap_xi_nabla_eval_with(&c, w_cur, w) {
                        Ok(v) if v.is_zero() => {}
                        _ => warnings.push(format!(
                            "root {w} fails the level-{} nabla cofactor",
                            k + 1
                        )),
                    }
                }
                kept
            };
            let out = children
                .into_iter()
                .map(|w| {
                    let mut ws = pt.ws.clone();
                    ws.push(w);
                    TowerPoint {
                        j0: pt.j0.clone(),
                        ws,
                    }
                })
                .collect();
            (out, warnings)
        })
        .collect();
    let mut points_out = vec![];
    let mut warnings = vec![];
    for (ps, ws) in results {
        points_out.extend(ps);
        warnings.extend(ws);
    }
    points_out.sort();
    Ok((points_out, warnings))
}

/// One enumerated level.
#[derive(Debug, Clone, Serialize)]
pub struct TowerLevel {
    pub k: usize,
    pub count: u128,
    /// (q+1)^2 q^(k-1)
    pub expected: u128,
    pub points: Vec<TowerPoint>,
}

/// Exhaustive enumeration of the reduced tower up to k_max.
#[derive(Debug, Clone, Serialize)]
pub struct TowerEnumeration {
    pub params_digest: String,
    pub seed: u64,
    pub q: u64,
    pub levels: Vec<TowerLevel>,
    pub warnings: Vec<String>,
}

pub fn enumerate_tower(params: &TowerParams, k_max: usize) -> Result<TowerEnumeration> {
    if k_max < 1 {
        return Err(Error::InvalidConfig {
            field: "k_max",
            reason: "must be >= 1".into(),
        });
    }
    let ctx = params.reduced_ctx()?;
    let q = params.q();
    let base = supersingular_j_set(params)?;
    let mut warnings = vec![];
    let mut frontier: Vec<TowerPoint> = base
        .into_iter()
        .map(|j0| TowerPoint { j0, ws: vec![] })
        .collect();
    let mut levels = vec![];
    for k in 1..=k_max {
        let (next, warns) = extend_points_ctx(&ctx, &frontier)?;
        warnings.extend(warns);
        let expected = (q as u128 + 1).pow(2) * (q as u128).pow(k as u32 - 1);
        let count = next.len() as u128;
        if count != expected {
            warnings.push(format!(
                "level {k}: count {count} differs from the closed form {expected}"
            ));
        }
        levels.push(TowerLevel {
            k,
            count,
            expected,
            points: next.clone(),
        });
        frontier = next;
    }
    Ok(TowerEnumeration {
        params_digest: params.digest(),
        seed: params.seed(),
        q,
        levels,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Genus and Ihara analytics.
// ---------------------------------------------------------------------------

/// A prime-power factor of an ideal: a prime of the given residue degree,
/// with multiplicity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrimePowerFactor {
    pub degree: u32,
    pub multiplicity: u32,
}

/// n = p_1^(r_1) ... p_s^(r_s).
#[derive(Debug, Clone, Serialize)]
pub struct IdealFactorization {
    pub factors: Vec<PrimePowerFactor>,
}

impl IdealFactorization {
    /// I_infinity^k: a single prime of degree 1 with multiplicity k.
    pub fn prime_power(k: u32) -> IdealFactorization {
        IdealFactorization {
            factors: vec![PrimePowerFactor {
                degree: 1,
                multiplicity: k,
            }],
        }
    }

    pub fn s(&self) -> u32 {
        self.factors.len() as u32
    }
}

/// epsilon(n) = prod q_i^(r_i - 1)(q_i + 1) and
/// kappa(n) = prod (q_i^floor(r_i/2) + q_i^(r_i - floor(r_i/2) - 1)),
/// with q_i = q^(deg p_i).
pub fn epsilon_kappa(fact: &IdealFactorization, q: u64) -> (u128, u128) {
    let mut eps: u128 = 1;
    let mut kap: u128 = 1;
    for f in &fact.factors {
        let qi = (q as u128).pow(f.degree);
        let r = f.multiplicity;
        assert!(r >= 1 && f.degree >= 1, "invalid factorization entry");
        eps *= qi.pow(r - 1) * (qi + 1);
        kap *= qi.pow(r / 2) + qi.pow(r - r / 2 - 1);
    }
    (eps, kap)
}

/// Genus of the level-k curve:
/// -1 + q^(k-1)(q+1)/(q-1) - 2 (q^floor(k/2) + q^(k - floor(k/2) - 1) - 1)/(q-1).
pub fn genus(q: u64, k: u32) -> Result<u128> {
    if k < 1 || q < 2 {
        return Err(Error::InvalidConfig {
            field: "k",
            reason: "genus needs k >= 1 and q >= 2".into(),
        });
    }
    let q = q as i128;
    let a = q.pow(k - 1) * (q + 1);
    let b = 2 * (q.pow(k / 2) + q.pow(k - k / 2 - 1) - 1);
    let num = a - b;
    if num % (q - 1) != 0 {
        return Err(Error::NonInteger);
    }
    let g = num / (q - 1) - 1;
    if g < 0 {
        return Err(Error::NonInteger);
    }
    Ok(g as u128)
}

/// The general genus formula with constant-field data supplied:
/// `1 + (q^delta - 1) eps P_K(q) / ((q^2-1)(q-1)) - P_K(1) delta (kappa +
/// 2^(s-1)(q-2)) / (q-1) + Delta`, where `Delta` equals
/// `-P_K(-1) 2^(s-1) q/(q+1)` when delta is odd and every prime divisor has
/// even degree, and 0 otherwise.
pub fn genus_general(
    q: u64,
    delta: u32,
    pk_at_q: i128,
    pk_at_1: i128,
    pk_at_minus1: i128,
    fact: &IdealFactorization,
) -> Result<i128> {
    if delta < 1 || fact.factors.is_empty() {
        return Err(Error::InvalidConfig {
            field: "factorization",
            reason: "need delta >= 1 and s >= 1".into(),
        });
    }
    let (eps, kap) = epsilon_kappa(fact, q);
    let q = q as i128;
    let s = fact.s();
    let two_pow = 2i128.pow(s - 1);
    let mut g = Ratio::from_integer(1i128);
    g += Ratio::new(
        (q.pow(delta) - 1) * eps as i128 * pk_at_q,
        (q * q - 1) * (q - 1),
    );
    g -= Ratio::new(
        pk_at_1 * delta as i128 * (kap as i128 + two_pow * (q - 2)),
        q - 1,
    );
    let all_even = fact.factors.iter().all(|f| f.degree % 2 == 0);
    if delta % 2 == 1 && all_even {
        g -= Ratio::new(pk_at_minus1 * two_pow * q, q + 1);
    }
    if !g.denom().is_one() {
        return Err(Error::NonInteger);
    }
    Ok(g.to_integer())
}

/// One analytics row of the tower.
#[derive(Debug, Clone, Serialize)]
pub struct GenusRow {
    pub k: u32,
    pub epsilon: u128,
    pub kappa: u128,
    pub genus: u128,
    pub ss_count: u128,
    /// Exact reduced ratio ss_count/genus; absent when genus = 0.
    pub ratio: Option<(u128, u128)>,
}

/// Genus/supersingular-count/ratio table with the optimality trend.
#[derive(Debug, Clone, Serialize)]
pub struct IharaReport {
    pub q: u64,
    /// The Ihara bound over F_{q^4}: q^2 - 1.
    pub bound: u128,
    pub rows: Vec<GenusRow>,
    pub min_ratio: Option<(u128, u128)>,
    /// ratio_k - bound strictly decreasing over the rows with genus > 0.
    pub strictly_decreasing: bool,
    /// ratio_{k_max} - bound, exact.
    pub final_gap: Option<(u128, u128)>,
}

/// ss_count at level k: (q+1)^2 q^(k-1).
pub fn supersingular_count(q: u64, k: u32) -> u128 {
    (q as u128 + 1).pow(2) * (q as u128).pow(k - 1)
}

pub fn genus_row(q: u64, k: u32) -> Result<GenusRow> {
    let (eps, kap) = epsilon_kappa(&IdealFactorization::prime_power(k), q);
    let g = genus(q, k)?;
    let ss = supersingular_count(q, k);
    let ratio = if g == 0 {
        None
    } else {
        let r = Ratio::new(ss, g);
        Some((*r.numer(), *r.denom()))
    };
    Ok(GenusRow {
        k,
        epsilon: eps,
        kappa: kap,
        genus: g,
        ss_count: ss,
        ratio,
    })
}

pub fn ihara_table(q: u64, k_max: u32) -> Result<IharaReport> {
    if k_max < 2 {
        return Err(Error::InvalidConfig {
            field: "k_max",
            reason: "ihara table needs k_max >= 2".into(),
        });
    }
    let rows: Vec<GenusRow> = (1..=k_max).map(|k| genus_row(q, k)).collect::<Result<_>>()?;
    let bound = (q as u128) * (q as u128) - 1;
    let ratios: Vec<Ratio<u128>> = rows
        .iter()
        .filter_map(|r| r.ratio.map(|(n, d)| Ratio::new(n, d)))
        .collect();
    let min_ratio = ratios.iter().min().map(|r| (*r.numer(), *r.denom()));
    let strictly_decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let final_gap = ratios.last().map(|r| {
        let gap = r - Ratio::from_integer(bound);
        (*gap.numer(), *gap.denom())
    });
    Ok(IharaReport {
        q,
        bound,
        rows,
        min_ratio,
        strictly_decreasing,
        final_gap,
    })
}

//! Length functions: the shared evaluator abstraction and the concrete
//! families — word lengths, weighted word lengths, the `|n| + eps^|n|` and
//! `|n| + eps` deformations on Z, logarithmic deformations, finite table
//! overrides, and based lengths of quotient graphs.
//!
//! Every family knows how to enumerate the ball `B_R = { g : l(g) <= R }`:
//! families with a linear word-length lower bound enumerate a word ball and
//! filter, graph-based lengths read the ball off the development, and the
//! logarithmic family uses the exponential radius `ceil(e^R - 1)` guarded by
//! the configured cap.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ggraph::QuotientGGraph;
use crate::groups::{GroupElement, GroupModel, ModelKind, Payload, DEFAULT_BALL_CAP};
use crate::numeric::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Exactness {
    Exact,
    Approx,
}

#[derive(Clone)]
enum Family {
    Word,
    Graph(Arc<QuotientGGraph>),
    EpsDeform { eps: Scalar },
    AdditiveEps { eps: Scalar },
    Log { base: Box<LengthFunction> },
    Table { overrides: Arc<BTreeMap<GroupElement, Scalar>>, fallback: Box<LengthFunction> },
}

/// An evaluator `g -> Scalar` with the metadata needed to enumerate balls.
#[derive(Clone)]
pub struct LengthFunction {
    model: Arc<GroupModel>,
    family: Family,
    label: String,
    exactness: Exactness,
    cap: usize,
}

impl LengthFunction {
    pub fn model(&self) -> &Arc<GroupModel> {
        &self.model
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Linear lower bound `(c_low, b)` guaranteeing `l(g) >= c_low*|g| - b`
    /// over the word norm, when the family admits one. Drives word-ball
    /// enumeration radii.
    pub fn lower_bound(&self) -> Option<(Scalar, Scalar)> {
        match &self.family {
            Family::Word | Family::EpsDeform { .. } | Family::AdditiveEps { .. } => {
                Some((Scalar::one(), Scalar::zero()))
            }
            Family::Graph(qg) => {
                let min_len = qg
                    .edges()
                    .iter()
                    .map(|e| e.length.clone())
                    .reduce(|a, b| if b.lt(&a) { b } else { a })?;
                let max_norm = qg
                    .edges()
                    .iter()
                    .map(|e| qg.model().word_norm(&e.voltage))
                    .max()
                    .unwrap_or(1)
                    .max(1);
                Some((&min_len / &Scalar::int(max_norm as i64), Scalar::zero()))
            }
            Family::Log { .. } | Family::Table { .. } => None,
        }
    }

    fn check_owned(&self, g: &GroupElement) -> Result<()> {
        if g.model_id() != self.model.id() {
            return Err(Error::ModelMismatch { expected: self.model.id(), found: g.model_id() });
        }
        Ok(())
    }

    pub fn eval(&self, g: &GroupElement) -> Result<Scalar> {
        self.check_owned(g)?;
        match &self.family {
            Family::Word => Ok(Scalar::int(self.model.word_norm(g) as i64)),
            Family::Graph(qg) => qg.distance(g),
            Family::EpsDeform { eps } => {
                let n = abs_z(g);
                if n == 0 {
                    return Ok(Scalar::zero());
                }
                let n_scalar = Scalar::int(n as i64);
                if n > u32::MAX as u64 {
                    return Err(Error::Resource { what: "eps exponent".into(), cap: u32::MAX as usize });
                }
                Ok(&n_scalar + &eps.powi(n as u32))
            }
            Family::AdditiveEps { eps } => {
                let n = abs_z(g);
                if n == 0 {
                    return Ok(Scalar::zero());
                }
                Ok(&Scalar::int(n as i64) + eps)
            }
            Family::Log { base } => {
                let b = base.eval(g)?;
                Ok(Scalar::approx((b.to_f64() + 1.0).ln()))
            }
            Family::Table { overrides, fallback } => match overrides.get(g) {
                Some(v) => Ok(v.clone()),
                None => fallback.eval(g),
            },
        }
    }

    /// Enumerates `B_radius = { g : l(g) <= radius }` in canonical order
    /// (identity included). Linear-bound families spot-check the bound on
    /// every enumerated element.
    pub fn ball(&self, radius: &Scalar) -> Result<Vec<GroupElement>> {
        if radius.lt(&Scalar::zero()) {
            return Ok(Vec::new());
        }
        match &self.family {
            Family::Graph(qg) => {
                Ok(qg.orbit_ball(radius)?.into_iter().map(|(g, _)| g).collect())
            }
            Family::Table { overrides, fallback } => {
                let mut set: std::collections::BTreeSet<GroupElement> =
                    fallback.ball(radius)?.into_iter().collect();
                set.extend(overrides.keys().cloned());
                let mut out = Vec::new();
                for g in set {
                    if self.eval(&g)?.le(radius) {
                        out.push(g);
                    }
                }
                self.model.sort_canonical(&mut out);
                Ok(out)
            }
            Family::Log { .. } => {
                let r = radius.to_f64() + radius.tol();
                let w = (r.exp() - 1.0).ceil();
                if !w.is_finite() || w > self.cap as f64 {
                    return Err(Error::Resource { what: "log-family word radius".into(), cap: self.cap });
                }
                self.filtered_word_ball(w as u64, radius, false)
            }
            _ => {
                let (c_low, b) = self.lower_bound().expect("linear families carry a bound");
                // l(g) <= R forces |g| <= (R + b)/c_low
                let w = (&(radius + &b) / &c_low).floor_u64();
                self.filtered_word_ball(w, radius, true)
            }
        }
    }

    fn filtered_word_ball(&self, word_radius: u64, radius: &Scalar, spot_check: bool) -> Result<Vec<GroupElement>> {
        let candidates = self.model.word_ball(word_radius, self.cap)?;
        let bound = self.lower_bound();
        let mut out = Vec::new();
        for g in candidates {
            let v = self.eval(&g)?;
            if spot_check {
                if let Some((c_low, b)) = &bound {
                    let floor = &(c_low * &Scalar::int(self.model.word_norm(&g) as i64)) - b;
                    if v.lt(&floor) {
                        return Err(Error::Internal(format!(
                            "declared lower bound is unsound at {g}: l = {v} < {floor}"
                        )));
                    }
                }
            }
            if v.le(radius) {
                out.push(g);
            }
        }
        // candidates arrive in canonical order already
        Ok(out)
    }
}

fn abs_z(g: &GroupElement) -> u64 {
    match g.payload() {
        Payload::Vector(v) => v[0].unsigned_abs(),
        _ => 0,
    }
}

fn require_z(model: &Arc<GroupModel>) -> Result<()> {
    match model.kind() {
        ModelKind::FreeAbelian { rank: 1 } => Ok(()),
        _ => Err(Error::Domain("this family is defined on the infinite cyclic group (free_abelian rank 1)".into())),
    }
}

fn require_unit_interval(eps: &Scalar) -> Result<()> {
    if eps.lt(&Scalar::zero()) || eps.ge(&Scalar::one()) {
        return Err(Error::Domain(format!("eps = {eps} is outside [0, 1)")));
    }
    Ok(())
}

/// The word length over the model's own generators (unit weights), read off
/// normal forms directly.
pub fn word_length(model: &Arc<GroupModel>) -> LengthFunction {
    LengthFunction {
        model: model.clone(),
        family: Family::Word,
        label: "word".into(),
        exactness: Exactness::Exact,
        cap: DEFAULT_BALL_CAP,
    }
}

/// Minimal total weight of a generator word, for a positive symmetric weight
/// assignment on a chosen generating set. Evaluation delegates to shortest
/// paths on the one-vertex quotient graph carrying one loop per inverse pair.
pub fn weighted_word_length(
    model: &Arc<GroupModel>,
    weights: &[(GroupElement, Scalar)],
) -> Result<LengthFunction> {
    if weights.is_empty() {
        return Err(Error::Validation("weighted word length needs at least one generator".into()));
    }
    let mut canon: BTreeMap<GroupElement, Scalar> = BTreeMap::new();
    for (g, w) in weights {
        if g.model_id() != model.id() {
            return Err(Error::ModelMismatch { expected: model.id(), found: g.model_id() });
        }
        if model.is_identity(g) {
            return Err(Error::Validation("identity cannot be a weighted generator".into()));
        }
        if !w.gt(&Scalar::zero()) {
            return Err(Error::Validation(format!("weight of {g} must be positive, got {w}")));
        }
        let inv = model.inverse(g)?;
        let rep = if inv.payload() < g.payload() { inv } else { g.clone() };
        match canon.get(&rep) {
            Some(prev) if prev.compare(w) != std::cmp::Ordering::Equal => {
                return Err(Error::Validation(format!(
                    "asymmetric weights on the pair {{{g}, inverse}}: {prev} vs {w}"
                )));
            }
            _ => {
                canon.insert(rep, w.clone());
            }
        }
    }
    let edges = canon
        .into_iter()
        .map(|(g, w)| ("p".to_string(), "p".to_string(), g, w))
        .collect();
    let qg = QuotientGGraph::new(model.clone(), vec!["p".into()], "p", edges)?;
    let exactness = if qg.is_exact() { Exactness::Exact } else { Exactness::Approx };
    Ok(LengthFunction {
        model: model.clone(),
        family: Family::Graph(qg),
        label: "weighted-word".into(),
        exactness,
        cap: DEFAULT_BALL_CAP,
    })
}

/// `l(n) = |n| + eps^|n|` for `n != 0`, `l(0) = 0`, on Z. Exact iff `eps`
/// is exact.
pub fn epsilon_deformation(model: &Arc<GroupModel>, eps: Scalar) -> Result<LengthFunction> {
    require_z(model)?;
    require_unit_interval(&eps)?;
    let exactness = if eps.is_exact() { Exactness::Exact } else { Exactness::Approx };
    let label = format!("eps_deform({eps})");
    Ok(LengthFunction { model: model.clone(), family: Family::EpsDeform { eps }, label, exactness, cap: DEFAULT_BALL_CAP })
}

/// `l(0) = 0`, `l(n) = |n| + eps` otherwise, on Z.
pub fn additive_eps(model: &Arc<GroupModel>, eps: Scalar) -> Result<LengthFunction> {
    require_z(model)?;
    require_unit_interval(&eps)?;
    let exactness = if eps.is_exact() { Exactness::Exact } else { Exactness::Approx };
    let label = format!("additive_eps({eps})");
    Ok(LengthFunction { model: model.clone(), family: Family::AdditiveEps { eps }, label, exactness, cap: DEFAULT_BALL_CAP })
}

/// `l(g) = ln(base(g) + 1)` for an integer-valued base length. Always
/// approximate; ball enumeration uses the exponential radius.
pub fn log_deformation(base: LengthFunction) -> Result<LengthFunction> {
    if !base.is_exact() {
        return Err(Error::Mode("log deformation needs an exact integer-valued base".into()));
    }
    let model = base.model.clone();
    let cap = base.cap;
    let label = format!("log({}+1)", base.label);
    Ok(LengthFunction {
        model,
        family: Family::Log { base: Box::new(base) },
        label,
        exactness: Exactness::Approx,
        cap,
    })
}

/// Overrides finitely many values of `fallback`. The table must send the
/// identity to 0 if present, and must be symmetric: a conflicting value on
/// an inverse pair is rejected, a missing inverse entry is mirrored.
pub fn table_length(
    model: &Arc<GroupModel>,
    entries: &[(GroupElement, Scalar)],
    fallback: LengthFunction,
) -> Result<LengthFunction> {
    if fallback.model.id() != model.id() {
        return Err(Error::ModelMismatch { expected: model.id(), found: fallback.model.id() });
    }
    let mut overrides: BTreeMap<GroupElement, Scalar> = BTreeMap::new();
    for (g, v) in entries {
        if g.model_id() != model.id() {
            return Err(Error::ModelMismatch { expected: model.id(), found: g.model_id() });
        }
        if model.is_identity(g) && !v.is_zero() {
            return Err(Error::Validation(format!("table must send the identity to 0, got {v}")));
        }
        if v.lt(&Scalar::zero()) {
            return Err(Error::Validation(format!("table value for {g} is negative: {v}")));
        }
        if let Some(prev) = overrides.get(g) {
            if prev.compare(v) != std::cmp::Ordering::Equal {
                return Err(Error::Validation(format!("conflicting table entries for {g}")));
            }
        }
        overrides.insert(g.clone(), v.clone());
    }
    // symmetric closure; explicit conflicts are errors
    let snapshot: Vec<(GroupElement, Scalar)> =
        overrides.iter().map(|(g, v)| (g.clone(), v.clone())).collect();
    for (g, v) in snapshot {
        let inv = model.inverse(&g)?;
        match overrides.get(&inv) {
            Some(w) if w.compare(&v) != std::cmp::Ordering::Equal => {
                return Err(Error::Validation(format!(
                    "asymmetric table: value at {g} is {v} but at its inverse {inv} is {w}"
                )));
            }
            Some(_) => {}
            None => {
                overrides.insert(inv, v);
            }
        }
    }
    let exactness = if fallback.is_exact() && overrides.values().all(Scalar::is_exact) {
        Exactness::Exact
    } else {
        Exactness::Approx
    };
    let cap = fallback.cap;
    let label = format!("table[{}]/{}", overrides.len(), fallback.label);
    Ok(LengthFunction {
        model: model.clone(),
        family: Family::Table { overrides: Arc::new(overrides), fallback: Box::new(fallback) },
        label,
        exactness,
        cap,
    })
}

/// The based length function of a quotient graph at its base vertex.
pub fn ggraph_based(qg: Arc<QuotientGGraph>) -> LengthFunction {
    let model = qg.model().clone();
    let exactness = if qg.is_exact() { Exactness::Exact } else { Exactness::Approx };
    LengthFunction {
        model,
        family: Family::Graph(qg),
        label: "ggraph-based".into(),
        exactness,
        cap: DEFAULT_BALL_CAP,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn z() -> Arc<GroupModel> {
        GroupModel::free_abelian(1).unwrap()
    }

    fn zn(model: &Arc<GroupModel>, n: i64) -> GroupElement {
        model.parse_element(&format!("g0^{n}")).unwrap()
    }

    #[test]
    fn standard_word_length_on_z() {
        let z = z();
        let l = word_length(&z);
        assert_eq!(l.eval(&zn(&z, 5)).unwrap(), Scalar::int(5));
        assert_eq!(l.eval(&z.identity()).unwrap(), Scalar::zero());
    }

    #[test]
    fn weighted_generating_set_123() {
        // generating set {1,2,3} with 1 weighted 1+eps, eps = 1/4
        let z = z();
        let l = weighted_word_length(
            &z,
            &[
                (zn(&z, 1), Scalar::ratio(5, 4)),
                (zn(&z, 2), Scalar::int(2)),
                (zn(&z, 3), Scalar::int(3)),
            ],
        )
        .unwrap();
        assert_eq!(l.eval(&zn(&z, 1)).unwrap(), Scalar::ratio(5, 4));
        assert_eq!(l.eval(&zn(&z, 2)).unwrap(), Scalar::int(2));
        for n in 2..=9 {
            assert_eq!(l.eval(&zn(&z, n)).unwrap(), Scalar::int(n), "l({n})");
        }
    }

    #[test]
    fn weighted_unit_weights_match_word_norm() {
        let f2 = GroupModel::free(2).unwrap();
        let weights: Vec<_> =
            f2.generators().iter().map(|g| (g.clone(), Scalar::one())).collect();
        let l = weighted_word_length(&f2, &weights).unwrap();
        let abab = f2.parse_element("g0 g1 g0 g1").unwrap();
        assert_eq!(l.eval(&abab).unwrap(), Scalar::int(4));
        for g in f2.word_ball(3, DEFAULT_BALL_CAP).unwrap() {
            assert_eq!(l.eval(&g).unwrap(), Scalar::int(f2.word_norm(&g) as i64));
        }
    }

    #[test]
    fn weighted_rejects_asymmetric_weights() {
        let z = z();
        let bad = weighted_word_length(
            &z,
            &[(zn(&z, 1), Scalar::int(1)), (zn(&z, -1), Scalar::int(2))],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn eps_deformation_values() {
        let z = z();
        let l = epsilon_deformation(&z, Scalar::ratio(1, 2)).unwrap();
        assert_eq!(l.eval(&z.identity()).unwrap(), Scalar::zero());
        assert_eq!(l.eval(&zn(&z, 1)).unwrap(), Scalar::ratio(3, 2));
        assert_eq!(l.eval(&zn(&z, 2)).unwrap(), Scalar::ratio(9, 4));
        assert_eq!(l.eval(&zn(&z, 3)).unwrap(), Scalar::ratio(25, 8));
        assert_eq!(l.eval(&zn(&z, -3)).unwrap(), Scalar::ratio(25, 8));

        let l0 = epsilon_deformation(&z, Scalar::zero()).unwrap();
        for n in -6..=6 {
            assert_eq!(l0.eval(&zn(&z, n)).unwrap(), Scalar::int(n.abs()));
        }
        assert!(epsilon_deformation(&z, Scalar::int(1)).is_err());
        assert!(epsilon_deformation(&z, Scalar::ratio(-1, 2)).is_err());
    }

    #[test]
    fn eps_deformation_sandwich() {
        // l_0(n) <= l_eps(n) <= l_0(n) + eps on the ball
        let z = z();
        for (num, den) in [(1i64, 4i64), (1, 2), (3, 4)] {
            let eps = Scalar::ratio(num, den);
            let l = epsilon_deformation(&z, eps.clone()).unwrap();
            for n in -12..=12i64 {
                if n == 0 {
                    continue;
                }
                let le = l.eval(&zn(&z, n)).unwrap();
                let l0 = Scalar::int(n.abs());
                assert!(l0.le(&le) && le.le(&(&l0 + &eps)));
            }
        }
    }

    #[test]
    fn additive_eps_values() {
        let z = z();
        let l = additive_eps(&z, Scalar::ratio(1, 2)).unwrap();
        assert_eq!(l.eval(&zn(&z, 1)).unwrap(), Scalar::ratio(3, 2));
        assert_eq!(l.eval(&zn(&z, -4)).unwrap(), Scalar::ratio(9, 2));
        let l0 = additive_eps(&z, Scalar::zero()).unwrap();
        assert_eq!(l0.eval(&zn(&z, 7)).unwrap(), Scalar::int(7));
    }

    #[test]
    fn log_values() {
        let z = z();
        let l = log_deformation(word_length(&z)).unwrap();
        assert!(l.eval(&z.identity()).unwrap().is_zero());
        let ln2 = l.eval(&zn(&z, 1)).unwrap();
        assert!((ln2.to_f64() - 0.6931471805599453).abs() < 1e-12);
        assert!(!l.is_exact());
    }

    #[test]
    fn table_override_and_validation() {
        let z = z();
        let base = word_length(&z);
        // empty table changes nothing
        let l = table_length(&z, &[], base.clone()).unwrap();
        assert_eq!(l.eval(&zn(&z, 4)).unwrap(), Scalar::int(4));
        // symmetric closure fills the inverse automatically
        let l = table_length(&z, &[(zn(&z, 2), Scalar::ratio(1, 4))], base.clone()).unwrap();
        assert_eq!(l.eval(&zn(&z, 2)).unwrap(), Scalar::ratio(1, 4));
        assert_eq!(l.eval(&zn(&z, -2)).unwrap(), Scalar::ratio(1, 4));
        assert_eq!(l.eval(&zn(&z, 3)).unwrap(), Scalar::int(3));
        // explicit conflict is rejected
        let bad = table_length(
            &z,
            &[(zn(&z, 1), Scalar::int(5)), (zn(&z, -1), Scalar::int(6))],
            base,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn balls_under_each_family() {
        let z = z();
        let l = epsilon_deformation(&z, Scalar::ratio(1, 2)).unwrap();
        // l(9) = 9 + 2^-9 <= 10 but l(10) = 10 + 2^-10 > 10
        let ball = l.ball(&Scalar::int(10)).unwrap();
        assert_eq!(ball.len(), 19);

        let spur = fixtures::load_graph("z_spur").unwrap();
        let ls = ggraph_based(spur);
        // l(n) = |n| + 1/2: radius 2 holds 0, ±1
        let ball = ls.ball(&Scalar::int(2)).unwrap();
        assert_eq!(ball.len(), 3);

        let lg = log_deformation(word_length(&z)).unwrap();
        // ln(|n|+1) <= ln 4 up to |n| = 3
        let ball = lg.ball(&Scalar::approx((4.0f64).ln())).unwrap();
        assert_eq!(ball.len(), 7);
    }

    #[test]
    fn a2_symmetry_on_balls() {
        let z = z();
        let families = [
            word_length(&z),
            epsilon_deformation(&z, Scalar::ratio(1, 2)).unwrap(),
            additive_eps(&z, Scalar::ratio(1, 4)).unwrap(),
            log_deformation(word_length(&z)).unwrap(),
        ];
        for l in &families {
            for g in l.ball(&Scalar::int(6)).unwrap() {
                let inv = z.inverse(&g).unwrap();
                assert_eq!(l.eval(&g).unwrap(), l.eval(&inv).unwrap());
            }
        }
    }
}

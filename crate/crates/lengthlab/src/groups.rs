//! Group models with effective element arithmetic and word-ball enumeration.
//!
//! Three kinds of model are supported: free abelian groups (normal form: an
//! integer vector), free groups (normal form: a freely reduced word over
//! signed generator indices) and finite groups given by a multiplication
//! table. Every element carries the id of its owning model; mixing elements
//! across models is a usage error.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on enumerated ball sizes.
pub const DEFAULT_BALL_CAP: usize = 1_000_000;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

/// Normal form payload of a group element.
///
/// - `Vector`: exponent vector in a free abelian group.
/// - `Word`: freely reduced word; entry `k > 0` is generator `k-1`, entry
///   `k < 0` its inverse.
/// - `Index`: element index in a finite multiplication table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Payload {
    Vector(Vec<i64>),
    Word(Vec<i32>),
    Index(u32),
}

/// An element of a [`GroupModel`], always held in normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupElement {
    pub(crate) model: u64,
    pub(crate) payload: Payload,
}

impl GroupElement {
    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn model_id(&self) -> u64 {
        self.model
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Vector(v) => {
                if v.iter().all(|&x| x == 0) {
                    return f.write_str("identity");
                }
                let mut first = true;
                for (i, &e) in v.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if !first {
                        f.write_str(" ")?;
                    }
                    first = false;
                    write_power(f, i, e)?;
                }
                Ok(())
            }
            Payload::Word(w) => {
                if w.is_empty() {
                    return f.write_str("identity");
                }
                let mut first = true;
                let mut i = 0;
                while i < w.len() {
                    let letter = w[i];
                    let mut run = 1usize;
                    while i + run < w.len() && w[i + run] == letter {
                        run += 1;
                    }
                    if !first {
                        f.write_str(" ")?;
                    }
                    first = false;
                    let gen = letter.unsigned_abs() as usize - 1;
                    let exp = if letter > 0 { run as i64 } else { -(run as i64) };
                    write_power(f, gen, exp)?;
                    i += run;
                }
                Ok(())
            }
            Payload::Index(i) => write!(f, "e{i}"),
        }
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, gen: usize, exp: i64) -> fmt::Result {
    let (name, mag) = if exp >= 0 { ('g', exp) } else { ('G', -exp) };
    if mag == 1 {
        write!(f, "{name}{gen}")
    } else {
        write!(f, "{name}{gen}^{mag}")
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug)]
pub enum ModelKind {
    FreeAbelian {
        rank: usize,
    },
    Free {
        rank: usize,
    },
    Finite {
        table: Vec<Vec<u32>>,
        inverse: Vec<u32>,
        identity: u32,
        /// BFS depth of every element over the generator set.
        depth: Vec<u32>,
    },
}

/// A concrete group with an ordered, inverse-closed generating set.
#[derive(Debug)]
pub struct GroupModel {
    id: u64,
    kind: ModelKind,
    generators: Vec<GroupElement>,
}

/// JSON shape of a group spec file.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<u32>>,
}

impl GroupModel {
    pub fn free_abelian(rank: usize) -> Result<Arc<Self>> {
        if rank == 0 {
            return Err(Error::Validation("rank must be positive".into()));
        }
        let id = NEXT_MODEL_ID.fetch_add(1, AtomicOrdering::Relaxed);
        let mut generators = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            for sign in [1i64, -1] {
                let mut v = vec![0i64; rank];
                v[i] = sign;
                generators.push(GroupElement { model: id, payload: Payload::Vector(v) });
            }
        }
        Ok(Arc::new(GroupModel { id, kind: ModelKind::FreeAbelian { rank }, generators }))
    }

    pub fn free(rank: usize) -> Result<Arc<Self>> {
        if rank == 0 {
            return Err(Error::Validation("rank must be positive".into()));
        }
        let id = NEXT_MODEL_ID.fetch_add(1, AtomicOrdering::Relaxed);
        let mut generators = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            for sign in [1i32, -1] {
                let letter = (i as i32 + 1) * sign;
                generators.push(GroupElement { model: id, payload: Payload::Word(vec![letter]) });
            }
        }
        Ok(Arc::new(GroupModel { id, kind: ModelKind::Free { rank }, generators }))
    }

    /// Builds a finite model from a multiplication table (`table[a][b]` is
    /// the index of `a*b`). Verified at load: the table is square, an
    /// identity exists, every element has a two-sided inverse, the operation
    /// is associative, and the chosen generators generate.
    ///
    /// `generators` defaults to all non-identity elements.
    pub fn finite(table: Vec<Vec<u32>>, generators: Option<Vec<u32>>) -> Result<Arc<Self>> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Validation("empty multiplication table".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&e| e as usize >= n) {
                return Err(Error::Validation("multiplication table is not a square over valid indices".into()));
            }
        }
        let identity = (0..n as u32)
            .find(|&e| {
                (0..n as u32).all(|g| table[e as usize][g as usize] == g && table[g as usize][e as usize] == g)
            })
            .ok_or_else(|| Error::Validation("table has no identity element".into()))?;
        let mut inverse = vec![u32::MAX; n];
        for g in 0..n {
            let inv = (0..n as u32)
                .find(|&h| table[g][h as usize] == identity && table[h as usize][g] == identity)
                .ok_or_else(|| Error::Validation(format!("element e{g} has no two-sided inverse")))?;
            inverse[g] = inv;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let ab_c = table[table[a][b] as usize][c];
                    let a_bc = table[a][table[b][c] as usize];
                    if ab_c != a_bc {
                        return Err(Error::Validation(format!(
                            "table is not associative at (e{a}, e{b}, e{c})"
                        )));
                    }
                }
            }
        }
        let mut gens: Vec<u32> = match generators {
            Some(g) => {
                if g.iter().any(|&x| x as usize >= n) {
                    return Err(Error::Validation("generator index out of range".into()));
                }
                g.into_iter().filter(|&g| g != identity).collect()
            }
            None => (0..n as u32).filter(|&g| g != identity).collect(),
        };
        // close under inverses, preserving first-seen order
        let mut seen: HashSet<u32> = gens.iter().copied().collect();
        for i in 0..gens.len() {
            let inv = inverse[gens[i] as usize];
            if seen.insert(inv) {
                gens.push(inv);
            }
        }
        if gens.is_empty() && n > 1 {
            return Err(Error::Validation("generator list is empty".into()));
        }
        // closure check + BFS depth table
        let mut depth = vec![u32::MAX; n];
        depth[identity as usize] = 0;
        let mut queue = VecDeque::from([identity]);
        while let Some(g) = queue.pop_front() {
            for &s in &gens {
                let h = table[g as usize][s as usize];
                if depth[h as usize] == u32::MAX {
                    depth[h as usize] = depth[g as usize] + 1;
                    queue.push_back(h);
                }
            }
        }
        if depth.iter().any(|&d| d == u32::MAX) {
            return Err(Error::Validation("generators do not generate the whole table".into()));
        }
        let id = NEXT_MODEL_ID.fetch_add(1, AtomicOrdering::Relaxed);
        let generators = gens
            .into_iter()
            .map(|g| GroupElement { model: id, payload: Payload::Index(g) })
            .collect();
        Ok(Arc::new(GroupModel {
            id,
            kind: ModelKind::Finite { table, inverse, identity, depth },
            generators,
        }))
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Arc<Self>> {
        match spec.kind.as_str() {
            "free" => Self::free(spec.rank.ok_or_else(|| Error::Validation("free group spec needs a rank".into()))?),
            "free_abelian" => Self::free_abelian(
                spec.rank.ok_or_else(|| Error::Validation("free_abelian spec needs a rank".into()))?,
            ),
            "finite" => Self::finite(
                spec.table.clone().ok_or_else(|| Error::Validation("finite spec needs a table".into()))?,
                spec.generators.clone(),
            ),
            other => Err(Error::Validation(format!("unknown group kind {other:?}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Arc<Self>> {
        let spec: GroupSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn identity(&self) -> GroupElement {
        let payload = match &self.kind {
            ModelKind::FreeAbelian { rank } => Payload::Vector(vec![0; *rank]),
            ModelKind::Free { .. } => Payload::Word(Vec::new()),
            ModelKind::Finite { identity, .. } => Payload::Index(*identity),
        };
        GroupElement { model: self.id, payload }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        match &g.payload {
            Payload::Vector(v) => v.iter().all(|&x| x == 0),
            Payload::Word(w) => w.is_empty(),
            Payload::Index(i) => matches!(&self.kind, ModelKind::Finite { identity, .. } if i == identity),
        }
    }

    fn check_owned(&self, g: &GroupElement) -> Result<()> {
        if g.model != self.id {
            return Err(Error::ModelMismatch { expected: self.id, found: g.model });
        }
        Ok(())
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_owned(a)?;
        self.check_owned(b)?;
        let payload = match (&self.kind, &a.payload, &b.payload) {
            (ModelKind::FreeAbelian { .. }, Payload::Vector(x), Payload::Vector(y)) => {
                Payload::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (ModelKind::Free { .. }, Payload::Word(x), Payload::Word(y)) => {
                let mut out = x.clone();
                for &letter in y {
                    if out.last().is_some_and(|&l| l == -letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                Payload::Word(out)
            }
            (ModelKind::Finite { table, .. }, Payload::Index(i), Payload::Index(j)) => {
                Payload::Index(table[*i as usize][*j as usize])
            }
            _ => return Err(Error::Internal("payload does not match model kind".into())),
        };
        Ok(GroupElement { model: self.id, payload })
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_owned(a)?;
        let payload = match (&self.kind, &a.payload) {
            (ModelKind::FreeAbelian { .. }, Payload::Vector(x)) => Payload::Vector(x.iter().map(|v| -v).collect()),
            (ModelKind::Free { .. }, Payload::Word(x)) => Payload::Word(x.iter().rev().map(|l| -l).collect()),
            (ModelKind::Finite { inverse, .. }, Payload::Index(i)) => Payload::Index(inverse[*i as usize]),
            _ => return Err(Error::Internal("payload does not match model kind".into())),
        };
        Ok(GroupElement { model: self.id, payload })
    }

    /// Word length of the normal form over the model's generators.
    pub fn word_norm(&self, g: &GroupElement) -> u64 {
        match &g.payload {
            Payload::Vector(v) => v.iter().map(|x| x.unsigned_abs()).sum(),
            Payload::Word(w) => w.len() as u64,
            Payload::Index(i) => match &self.kind {
                ModelKind::Finite { depth, .. } => depth[*i as usize] as u64,
                _ => 0,
            },
        }
    }

    /// All elements expressible as products of at most `radius` generators,
    /// sorted by (word length, payload). Contains the identity and is closed
    /// under inverses.
    pub fn word_ball(&self, radius: u64, cap: usize) -> Result<Vec<GroupElement>> {
        let mut seen: HashMap<Payload, u64> = HashMap::new();
        let identity = self.identity();
        seen.insert(identity.payload.clone(), 0);
        let mut frontier = vec![identity];
        let mut depth = 0u64;
        while depth < radius && !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for g in &frontier {
                for s in &self.generators {
                    let h = self.multiply(g, s)?;
                    if !seen.contains_key(&h.payload) {
                        if seen.len() >= cap {
                            return Err(Error::Resource { what: "word ball".into(), cap });
                        }
                        seen.insert(h.payload.clone(), depth);
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<(u64, Payload)> = seen.into_iter().map(|(p, d)| (d, p)).collect();
        out.sort_unstable();
        Ok(out
            .into_iter()
            .map(|(_, payload)| GroupElement { model: self.id, payload })
            .collect())
    }

    /// Parses an element word like `"g0^2 G1 g0"`, `"identity"`, or (finite
    /// models) `"e3"`. `G<i>` denotes the inverse of `g<i>`; `^k` repeats
    /// with `k` possibly negative.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        if text.is_empty() || text == "identity" || text == "1" {
            return Ok(self.identity());
        }
        let mut acc = self.identity();
        for token in text.split_whitespace() {
            let (base, exp) = match token.split_once('^') {
                Some((b, e)) => {
                    let exp: i64 = e
                        .parse()
                        .map_err(|_| Error::Validation(format!("bad exponent in {token:?}")))?;
                    (b, exp)
                }
                None => (token, 1),
            };
            let factor = self.parse_atom(base)?;
            let (factor, exp) = if exp < 0 { (self.inverse(&factor)?, -exp) } else { (factor, exp) };
            for _ in 0..exp {
                acc = self.multiply(&acc, &factor)?;
            }
        }
        Ok(acc)
    }

    fn parse_atom(&self, token: &str) -> Result<GroupElement> {
        let err = || Error::Validation(format!("unknown element atom {token:?}"));
        if let Some(idx) = token.strip_prefix('e') {
            if let ModelKind::Finite { table, .. } = &self.kind {
                let i: u32 = idx.parse().map_err(|_| err())?;
                if (i as usize) < table.len() {
                    return Ok(GroupElement { model: self.id, payload: Payload::Index(i) });
                }
            }
            return Err(err());
        }
        let (inv, rest) = if let Some(r) = token.strip_prefix('g') {
            (false, r)
        } else if let Some(r) = token.strip_prefix('G') {
            (true, r)
        } else {
            return Err(err());
        };
        let i: usize = rest.parse().map_err(|_| err())?;
        let base = match &self.kind {
            ModelKind::FreeAbelian { rank } => {
                if i >= *rank {
                    return Err(err());
                }
                let mut v = vec![0i64; *rank];
                v[i] = 1;
                GroupElement { model: self.id, payload: Payload::Vector(v) }
            }
            ModelKind::Free { rank } => {
                if i >= *rank {
                    return Err(err());
                }
                GroupElement { model: self.id, payload: Payload::Word(vec![i as i32 + 1]) }
            }
            ModelKind::Finite { .. } => {
                // g<i> names the i-th declared generator
                self.generators.get(i).cloned().ok_or_else(err)?
            }
        };
        if inv {
            self.inverse(&base)
        } else {
            Ok(base)
        }
    }

    /// Sort elements by (word length, payload); the canonical enumeration
    /// order used throughout for deterministic reports.
    pub fn sort_canonical(&self, elements: &mut [GroupElement]) {
        elements.sort_unstable_by(|a, b| {
            self.word_norm(a)
                .cmp(&self.word_norm(b))
                .then_with(|| a.payload.cmp(&b.payload))
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_inverse_cancellation() {
        let f2 = GroupModel::free(2).unwrap();
        let a = f2.parse_element("g0").unwrap();
        let ainv = f2.inverse(&a).unwrap();
        let prod = f2.multiply(&a, &ainv).unwrap();
        assert!(f2.is_identity(&prod));
    }

    #[test]
    fn free_abelian_addition() {
        let z = GroupModel::free_abelian(1).unwrap();
        let three = z.parse_element("g0^3").unwrap();
        let four = z.parse_element("g0^4").unwrap();
        let seven = z.multiply(&three, &four).unwrap();
        assert_eq!(seven, z.parse_element("g0^7").unwrap());
    }

    #[test]
    fn free_reduction_at_the_seam() {
        // (ab)(b^{-1}a) = aa, checked against a hand reduction
        let f2 = GroupModel::free(2).unwrap();
        let ab = f2.parse_element("g0 g1").unwrap();
        let binv_a = f2.parse_element("G1 g0").unwrap();
        let prod = f2.multiply(&ab, &binv_a).unwrap();
        assert_eq!(prod, f2.parse_element("g0^2").unwrap());
        // and the normal form never contains an adjacent inverse pair
        if let Payload::Word(w) = prod.payload() {
            assert!(w.windows(2).all(|p| p[0] != -p[1]));
        } else {
            panic!("free element should carry a word payload");
        }
    }

    #[test]
    fn word_ball_z_radius_3() {
        let z = GroupModel::free_abelian(1).unwrap();
        let ball = z.word_ball(3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 7);
        let expected: Vec<GroupElement> =
            ["identity", "G0", "g0", "G0^2", "g0^2", "G0^3", "g0^3"]
                .iter()
                .map(|w| z.parse_element(w).unwrap())
                .collect();
        assert_eq!(ball, expected);
    }

    #[test]
    fn word_ball_f2_radius_2_by_bfs_count() {
        // 1 + 4 + 4*3 elements
        let f2 = GroupModel::free(2).unwrap();
        let ball = f2.word_ball(2, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 17);
    }

    #[test]
    fn word_ball_radius_0() {
        let f2 = GroupModel::free(2).unwrap();
        let ball = f2.word_ball(0, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 1);
        assert!(f2.is_identity(&ball[0]));
    }

    #[test]
    fn word_ball_cap() {
        let f2 = GroupModel::free(2).unwrap();
        match f2.word_ball(10, 50) {
            Err(Error::Resource { cap, .. }) => assert_eq!(cap, 50),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn ball_nesting() {
        let f2 = GroupModel::free(2).unwrap();
        let b2 = f2.word_ball(2, DEFAULT_BALL_CAP).unwrap();
        let b3 = f2.word_ball(3, DEFAULT_BALL_CAP).unwrap();
        assert!(b2.len() <= b3.len());
        let set: HashSet<_> = b3.iter().collect();
        assert!(b2.iter().all(|g| set.contains(g)));
    }

    #[test]
    fn model_mismatch_is_an_error() {
        let z1 = GroupModel::free_abelian(1).unwrap();
        let z2 = GroupModel::free_abelian(1).unwrap();
        let a = z1.identity();
        let b = z2.identity();
        assert!(matches!(z1.multiply(&a, &b), Err(Error::ModelMismatch { .. })));
    }

    fn s3_table() -> Vec<Vec<u32>> {
        // permutations of {0,1,2} in one-line notation, composed left-to-right
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let compose = |p: &[usize; 3], q: &[usize; 3]| -> [usize; 3] {
            [q[p[0]], q[p[1]], q[p[2]]]
        };
        let mut table = vec![vec![0u32; 6]; 6];
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                let r = compose(p, q);
                let k = perms.iter().position(|x| *x == r).unwrap();
                table[i][j] = k as u32;
            }
        }
        table
    }

    #[test]
    fn finite_s3_loads_and_multiplies() {
        let s3 = GroupModel::finite(s3_table(), None).unwrap();
        let ball = s3.word_ball(3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 6);
        // transpositions generate
        let s3b = GroupModel::finite(s3_table(), Some(vec![1, 2])).unwrap();
        assert_eq!(s3b.word_ball(5, DEFAULT_BALL_CAP).unwrap().len(), 6);
    }

    #[test]
    fn finite_bad_tables_rejected() {
        // 2x2 table that is not a group (no identity row/col consistency)
        let bad = vec![vec![0, 0], vec![0, 0]];
        assert!(GroupModel::finite(bad, None).is_err());
        // non-generating subset: rotations of S3 cannot produce transpositions
        assert!(GroupModel::finite(s3_table(), Some(vec![4])).is_err());
    }

    #[test]
    fn display_and_parse_round_trip() {
        let f2 = GroupModel::free(2).unwrap();
        for w in ["identity", "g0", "G1^2 g0", "g0^3 G1 g0"] {
            let e = f2.parse_element(w).unwrap();
            let back = f2.parse_element(&e.to_string()).unwrap();
            assert_eq!(e, back);
        }
        let z2 = GroupModel::free_abelian(2).unwrap();
        let e = z2.parse_element("g0^2 G1^3").unwrap();
        assert_eq!(e.to_string(), "g0^2 G1^3");
    }
}

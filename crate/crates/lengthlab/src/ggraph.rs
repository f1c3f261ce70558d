//! Metric G-graphs presented by finite quotient (voltage) data.
//!
//! A quotient graph carries finitely many vertices and edges; each edge holds
//! a group element (its voltage) and a positive length. The developed graph
//! has vertices `(g, v)` for `g` in the group and `v` a quotient vertex, and
//! an edge `(g, tail) -- (s*g, head)` of the same length for every quotient
//! edge with voltage `s`. The group acts freely on the right via
//! `(g, v) * h = (g*h, v)`, so based lengths at a vertex fiber are honest
//! length functions.
//!
//! Development is lazy: a monotone Dijkstra frontier grows from the base
//! vertex `(identity, basepoint)` exactly as far as queries demand.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel, GroupSpec, Payload, DEFAULT_BALL_CAP};
use crate::length::LengthFunction;
use crate::numeric::{OrdScalar, Scalar};

#[derive(Clone, Debug)]
pub struct QEdge {
    pub tail: usize,
    pub head: usize,
    pub voltage: GroupElement,
    pub length: Scalar,
    voltage_inv: GroupElement,
}

/// JSON shape of a quotient-graph spec file.
#[derive(Debug, Serialize, Deserialize)]
pub struct QuotientGraphSpec {
    pub group: GroupSpec,
    pub vertices: Vec<String>,
    pub basepoint: String,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub tail: String,
    pub head: String,
    pub voltage: String,
    pub length: Scalar,
}

struct DevVertex {
    element: GroupElement,
    qv: usize,
    dist: Option<Scalar>,
    tentative: Option<Scalar>,
}

#[derive(Clone)]
struct Frontier {
    dist: OrdScalar,
    payload: Payload,
    qv: usize,
    id: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .cmp(&other.dist)
            .then_with(|| self.payload.cmp(&other.payload))
            .then_with(|| self.qv.cmp(&other.qv))
    }
}

struct DevelopState {
    ids: HashMap<(Payload, usize), usize>,
    verts: Vec<DevVertex>,
    heap: BinaryHeap<Reverse<Frontier>>,
}

/// Finite voltage-graph presentation of a metric G-graph.
pub struct QuotientGGraph {
    model: Arc<GroupModel>,
    vertex_labels: Vec<String>,
    basepoint: usize,
    edges: Vec<QEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    exact: bool,
    cap: usize,
    state: Mutex<DevelopState>,
}

/// A finite snapshot of the development: all vertices within the requested
/// path distance of the base vertex, with the induced weighted edges.
#[derive(Debug, Clone)]
pub struct DevelopedBall {
    /// (group element, quotient vertex index, distance from base)
    pub vertices: Vec<(GroupElement, usize, Scalar)>,
    /// (vertex index, vertex index, length)
    pub edges: Vec<(usize, usize, Scalar)>,
    pub radius: Scalar,
    pub labels: Vec<String>,
}

impl QuotientGGraph {
    pub fn new(
        model: Arc<GroupModel>,
        vertex_labels: Vec<String>,
        basepoint: &str,
        edges: Vec<(String, String, GroupElement, Scalar)>,
    ) -> Result<Arc<Self>> {
        if vertex_labels.is_empty() {
            return Err(Error::Validation("quotient graph needs at least one vertex".into()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, l) in vertex_labels.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(Error::Validation(format!("duplicate vertex label {l:?}")));
            }
        }
        let basepoint = *index
            .get(basepoint)
            .ok_or_else(|| Error::Validation(format!("basepoint {basepoint:?} is not a vertex")))?;
        let exact = edges.iter().all(|(_, _, _, len)| len.is_exact());
        let mut qedges = Vec::with_capacity(edges.len());
        for (tail, head, voltage, length) in edges {
            let tail = *index
                .get(tail.as_str())
                .ok_or_else(|| Error::Validation(format!("unknown edge tail {tail:?}")))?;
            let head = *index
                .get(head.as_str())
                .ok_or_else(|| Error::Validation(format!("unknown edge head {head:?}")))?;
            if !length.gt(&Scalar::zero()) {
                return Err(Error::Validation(format!("edge length {length} is not positive")));
            }
            if voltage.model_id() != model.id() {
                return Err(Error::ModelMismatch { expected: model.id(), found: voltage.model_id() });
            }
            // mixed-mode graphs are promoted to approx wholesale
            let length = if exact { length } else { Scalar::approx_with_tol(length.to_f64(), length.tol().max(crate::numeric::DEFAULT_TOL)) };
            let voltage_inv = model.inverse(&voltage)?;
            qedges.push(QEdge { tail, head, voltage, length, voltage_inv });
        }
        if qedges.is_empty() {
            return Err(Error::Validation("quotient graph needs at least one edge".into()));
        }
        let mut out_edges = vec![Vec::new(); vertex_labels.len()];
        let mut in_edges = vec![Vec::new(); vertex_labels.len()];
        for (i, e) in qedges.iter().enumerate() {
            out_edges[e.tail].push(i);
            in_edges[e.head].push(i);
        }
        let graph = QuotientGGraph {
            model,
            vertex_labels,
            basepoint,
            edges: qedges,
            out_edges,
            in_edges,
            exact,
            cap: DEFAULT_BALL_CAP,
            state: Mutex::new(DevelopState { ids: HashMap::new(), verts: Vec::new(), heap: BinaryHeap::new() }),
        };
        graph.reset_state();
        Ok(Arc::new(graph))
    }

    pub fn from_spec(spec: &QuotientGraphSpec) -> Result<Arc<Self>> {
        let model = GroupModel::from_spec(&spec.group)?;
        let edges = spec
            .edges
            .iter()
            .map(|e| {
                let voltage = model.parse_element(&e.voltage)?;
                Ok((e.tail.clone(), e.head.clone(), voltage, e.length.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, spec.vertices.clone(), &spec.basepoint, edges)
    }

    pub fn from_json(text: &str) -> Result<Arc<Self>> {
        let spec: QuotientGraphSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> QuotientGraphSpec {
        let group = match self.model.kind() {
            crate::groups::ModelKind::FreeAbelian { rank } => GroupSpec {
                kind: "free_abelian".into(),
                rank: Some(*rank),
                table: None,
                generators: None,
            },
            crate::groups::ModelKind::Free { rank } => {
                GroupSpec { kind: "free".into(), rank: Some(*rank), table: None, generators: None }
            }
            crate::groups::ModelKind::Finite { table, .. } => GroupSpec {
                kind: "finite".into(),
                rank: None,
                table: Some(table.clone()),
                generators: None,
            },
        };
        QuotientGraphSpec {
            group,
            vertices: self.vertex_labels.clone(),
            basepoint: self.vertex_labels[self.basepoint].clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    tail: self.vertex_labels[e.tail].clone(),
                    head: self.vertex_labels[e.head].clone(),
                    voltage: e.voltage.to_string(),
                    length: e.length.clone(),
                })
                .collect(),
        }
    }

    /// Same graph (same model, same edges) with a different development cap.
    pub fn with_cap(self: &Arc<Self>, cap: usize) -> Arc<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                (
                    self.vertex_labels[e.tail].clone(),
                    self.vertex_labels[e.head].clone(),
                    e.voltage.clone(),
                    e.length.clone(),
                )
            })
            .collect();
        let mut g = QuotientGGraph::new(
            self.model.clone(),
            self.vertex_labels.clone(),
            &self.vertex_labels[self.basepoint],
            edges,
        )
        .expect("rebuilding a valid graph");
        Arc::get_mut(&mut g).expect("fresh arc").cap = cap;
        g
    }

    pub fn model(&self) -> &Arc<GroupModel> {
        &self.model
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.vertex_labels
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn edges(&self) -> &[QEdge] {
        &self.edges
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    fn reset_state(&self) {
        let mut st = self.state.lock().unwrap();
        st.ids.clear();
        st.verts.clear();
        st.heap.clear();
        let base = self.model.identity();
        st.ids.insert((base.payload().clone(), self.basepoint), 0);
        st.verts.push(DevVertex {
            element: base.clone(),
            qv: self.basepoint,
            dist: None,
            tentative: Some(Scalar::zero()),
        });
        st.heap.push(Reverse(Frontier {
            dist: OrdScalar(Scalar::zero()),
            payload: base.payload().clone(),
            qv: self.basepoint,
            id: 0,
        }));
    }

    fn intern(&self, st: &mut DevelopState, element: GroupElement, qv: usize) -> Result<usize> {
        let key = (element.payload().clone(), qv);
        if let Some(&id) = st.ids.get(&key) {
            return Ok(id);
        }
        if st.verts.len() >= self.cap {
            return Err(Error::Resource { what: "developed vertices".into(), cap: self.cap });
        }
        let id = st.verts.len();
        st.ids.insert(key, id);
        st.verts.push(DevVertex { element, qv, dist: None, tentative: None });
        Ok(id)
    }

    /// Settles the next frontier vertex; returns false when the frontier is
    /// exhausted.
    fn step(&self, st: &mut DevelopState) -> Result<bool> {
        let fr = loop {
            match st.heap.pop() {
                None => return Ok(false),
                Some(Reverse(fr)) => {
                    if st.verts[fr.id].dist.is_none() {
                        break fr;
                    }
                }
            }
        };
        let d = fr.dist.0.clone();
        st.verts[fr.id].dist = Some(d.clone());
        let (g, qv) = (st.verts[fr.id].element.clone(), st.verts[fr.id].qv);
        let mut relax = |st: &mut DevelopState, elt: GroupElement, nqv: usize, w: &Scalar| -> Result<()> {
            let nid = self.intern(st, elt, nqv)?;
            if st.verts[nid].dist.is_some() {
                return Ok(());
            }
            let nd = &d + w;
            let better = match &st.verts[nid].tentative {
                None => true,
                Some(t) => nd.total_cmp(t) == std::cmp::Ordering::Less,
            };
            if better {
                st.verts[nid].tentative = Some(nd.clone());
                st.heap.push(Reverse(Frontier {
                    dist: OrdScalar(nd),
                    payload: st.verts[nid].element.payload().clone(),
                    qv: nqv,
                    id: nid,
                }));
            }
            Ok(())
        };
        for &ei in &self.out_edges[qv] {
            let e = &self.edges[ei];
            let neighbor = self.model.multiply(&e.voltage, &g)?;
            relax(st, neighbor, e.head, &e.length)?;
        }
        for &ei in &self.in_edges[qv] {
            let e = &self.edges[ei];
            let neighbor = self.model.multiply(&e.voltage_inv, &g)?;
            relax(st, neighbor, e.tail, &e.length)?;
        }
        Ok(true)
    }

    fn ensure_radius(&self, st: &mut DevelopState, radius: &Scalar) -> Result<()> {
        loop {
            match st.heap.peek() {
                None => return Ok(()),
                Some(Reverse(fr)) => {
                    if fr.dist.0.gt(radius) {
                        return Ok(());
                    }
                }
            }
            self.step(st)?;
        }
    }

    /// Shortest-path distance from the base vertex to `(g, basepoint)`,
    /// developing as far as needed. Errors if the fiber is never reached
    /// within the vertex cap (the voltages do not reach `g`) or the
    /// component is exhausted first.
    pub fn distance(&self, g: &GroupElement) -> Result<Scalar> {
        if g.model_id() != self.model.id() {
            return Err(Error::ModelMismatch { expected: self.model.id(), found: g.model_id() });
        }
        let key = (g.payload().clone(), self.basepoint);
        let mut st = self.state.lock().unwrap();
        loop {
            if let Some(&id) = st.ids.get(&key) {
                if let Some(d) = &st.verts[id].dist {
                    return Ok(d.clone());
                }
            }
            if !self.step(&mut st)? {
                return Err(Error::Structure(format!(
                    "element {g} is not reachable in the developed component"
                )));
            }
        }
    }

    /// Based length truncated at `bound`: the distance if it is `<= bound`,
    /// otherwise `None`.
    pub fn based_length(&self, g: &GroupElement, bound: &Scalar) -> Result<Option<Scalar>> {
        if g.model_id() != self.model.id() {
            return Err(Error::ModelMismatch { expected: self.model.id(), found: g.model_id() });
        }
        let key = (g.payload().clone(), self.basepoint);
        let mut st = self.state.lock().unwrap();
        self.ensure_radius(&mut st, bound)?;
        if let Some(&id) = st.ids.get(&key) {
            if let Some(d) = &st.verts[id].dist {
                if d.le(bound) {
                    return Ok(Some(d.clone()));
                }
            }
        }
        Ok(None)
    }

    /// All group elements whose base-fiber vertex lies within `radius`,
    /// with their distances, in canonical order.
    pub fn orbit_ball(&self, radius: &Scalar) -> Result<Vec<(GroupElement, Scalar)>> {
        let mut st = self.state.lock().unwrap();
        self.ensure_radius(&mut st, radius)?;
        let mut out: Vec<(GroupElement, Scalar)> = st
            .verts
            .iter()
            .filter(|v| v.qv == self.basepoint)
            .filter_map(|v| v.dist.clone().map(|d| (v.element.clone(), d)))
            .filter(|(_, d)| d.le(radius))
            .collect();
        drop(st);
        out.sort_unstable_by(|a, b| {
            self.model
                .word_norm(&a.0)
                .cmp(&self.model.word_norm(&b.0))
                .then_with(|| a.0.payload().cmp(b.0.payload()))
        });
        Ok(out)
    }

    /// Breadth-limited development: every vertex within path distance
    /// `radius` of the base vertex, with the induced edges.
    pub fn develop(&self, radius: &Scalar) -> Result<DevelopedBall> {
        if radius.lt(&Scalar::zero()) {
            return Err(Error::Usage("development radius must be non-negative".into()));
        }
        let mut st = self.state.lock().unwrap();
        self.ensure_radius(&mut st, radius)?;
        let mut keep: Vec<usize> = st
            .verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v.dist.as_ref().is_some_and(|d| d.le(radius)))
            .map(|(i, _)| i)
            .collect();
        keep.sort_unstable_by(|&a, &b| {
            let va = &st.verts[a];
            let vb = &st.verts[b];
            va.element
                .payload()
                .cmp(vb.element.payload())
                .then_with(|| va.qv.cmp(&vb.qv))
        });
        let mut snap_index: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::with_capacity(keep.len());
        for (snap_id, &id) in keep.iter().enumerate() {
            snap_index.insert(id, snap_id);
            let v = &st.verts[id];
            vertices.push((v.element.clone(), v.qv, v.dist.clone().unwrap()));
        }
        let mut edges = Vec::new();
        for &id in &keep {
            let (g, qv) = (st.verts[id].element.clone(), st.verts[id].qv);
            for &ei in &self.out_edges[qv] {
                let e = &self.edges[ei];
                let neighbor = self.model.multiply(&e.voltage, &g)?;
                if let Some(&nid) = st.ids.get(&(neighbor.payload().clone(), e.head)) {
                    if let (Some(i), Some(j)) = (snap_index.get(&id), snap_index.get(&nid)) {
                        edges.push((*i, *j, e.length.clone()));
                    }
                }
            }
        }
        edges.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(DevelopedBall { vertices, edges, radius: radius.clone(), labels: self.vertex_labels.clone() })
    }

    /// Largest distance from any point of the developed metric realization
    /// to the orbit of the base vertex. Computed on a development large
    /// enough to contain a maximizing point: edge midpoint values
    /// `(d_orb(tail) + d_orb(head) + len) / 2` are orbit-periodic, so the
    /// quotient edges evaluated at their identity-fiber representatives
    /// suffice.
    pub fn covering_radius(&self) -> Result<Scalar> {
        // shortest paths in the quotient graph itself
        let n = self.vertex_labels.len();
        let mut dq: Vec<Option<Scalar>> = vec![None; n];
        dq[self.basepoint] = Some(Scalar::zero());
        let mut heap: BinaryHeap<Reverse<(OrdScalar, usize)>> = BinaryHeap::new();
        heap.push(Reverse((OrdScalar(Scalar::zero()), self.basepoint)));
        let mut settled = vec![false; n];
        while let Some(Reverse((OrdScalar(d), v))) = heap.pop() {
            if settled[v] {
                continue;
            }
            settled[v] = true;
            for (to, w) in self
                .edges
                .iter()
                .flat_map(|e| [(e.tail, e.head, &e.length), (e.head, e.tail, &e.length)])
                .filter(|(from, _, _)| *from == v)
                .map(|(_, to, w)| (to, w))
            {
                let nd = &d + w;
                let better = match &dq[to] {
                    None => true,
                    Some(cur) => nd.total_cmp(cur) == std::cmp::Ordering::Less,
                };
                if better {
                    dq[to] = Some(nd.clone());
                    heap.push(Reverse((OrdScalar(nd), to)));
                }
            }
        }
        let dq: Vec<Scalar> = dq
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Structure("quotient graph is disconnected".into()))?;
        let d_quot = dq.iter().fold(Scalar::zero(), |acc, d| if d.gt(&acc) { d.clone() } else { acc });
        let max_len = self
            .edges
            .iter()
            .map(|e| &e.length)
            .fold(Scalar::zero(), |acc, l| if l.gt(&acc) { l.clone() } else { acc });

        let r_dev = &(&d_quot + &max_len) * &Scalar::int(2);
        let ball = self.develop(&r_dev)?;

        // multi-source Dijkstra from every base-fiber vertex in the snapshot
        let m = ball.vertices.len();
        let mut adj: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); m];
        for (i, j, w) in &ball.edges {
            adj[*i].push((*j, w.clone()));
            adj[*j].push((*i, w.clone()));
        }
        let mut dorb: Vec<Option<Scalar>> = vec![None; m];
        let mut heap: BinaryHeap<Reverse<(OrdScalar, usize)>> = BinaryHeap::new();
        for (i, (_, qv, _)) in ball.vertices.iter().enumerate() {
            if *qv == self.basepoint {
                dorb[i] = Some(Scalar::zero());
                heap.push(Reverse((OrdScalar(Scalar::zero()), i)));
            }
        }
        let mut settled = vec![false; m];
        while let Some(Reverse((OrdScalar(d), v))) = heap.pop() {
            if settled[v] {
                continue;
            }
            settled[v] = true;
            for (to, w) in &adj[v] {
                let nd = &d + w;
                let better = match &dorb[*to] {
                    None => true,
                    Some(cur) => nd.total_cmp(cur) == std::cmp::Ordering::Less,
                };
                if better {
                    dorb[*to] = Some(nd.clone());
                    heap.push(Reverse((OrdScalar(nd), *to)));
                }
            }
        }
        // per quotient vertex, the true orbit distance is the minimum over
        // its fiber representatives in the snapshot
        let mut dmin: Vec<Option<Scalar>> = vec![None; n];
        for (i, (_, qv, _)) in ball.vertices.iter().enumerate() {
            if let Some(d) = &dorb[i] {
                let slot = &mut dmin[*qv];
                let better = match slot {
                    None => true,
                    Some(cur) => d.total_cmp(cur) == std::cmp::Ordering::Less,
                };
                if better {
                    *slot = Some(d.clone());
                }
            }
        }
        let dmin: Vec<Scalar> = dmin
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Structure("development did not reach every vertex orbit".into()))?;
        let mut r_cov = Scalar::zero();
        for e in &self.edges {
            let mid = (&(&dmin[e.tail] + &dmin[e.head]) + &e.length).half();
            if mid.gt(&r_cov) {
                r_cov = mid;
            }
        }
        Ok(r_cov)
    }
}

impl DevelopedBall {
    /// DOT rendering for inspection; vertices are `element|quotient`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph developed {\n  node [shape=box];\n");
        for (i, (g, qv, d)) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{g} | {} ({d})\"];", self.labels[*qv]);
        }
        for (i, j, w) in &self.edges {
            let _ = writeln!(out, "  n{i} -- n{j} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// The complete weighted graph on a finite ball, with edge `{g, h}` weighted
/// `l(gh^{-1})`, together with its shortest-path distances from the identity.
pub struct CompleteTruncation {
    pub elements: Vec<GroupElement>,
    pub weights: Vec<Vec<Scalar>>,
    pub dist_from_identity: Vec<Scalar>,
}

/// Builds the complete-graph truncation of `l` on `ball` and verifies that
/// the graph distance from the identity to every `g` equals `l(g)`; a
/// violating pair is reported as a triangle-inequality (A3) failure.
pub fn complete_graph_truncation(l: &LengthFunction, ball: &[GroupElement]) -> Result<CompleteTruncation> {
    let model = l.model().clone();
    let id_pos = ball
        .iter()
        .position(|g| model.is_identity(g))
        .ok_or_else(|| Error::Usage("ball must contain the identity".into()))?;
    let n = ball.len();
    let mut weights = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff = model.multiply(&ball[i], &model.inverse(&ball[j])?)?;
            weights[i][j] = l.eval(&diff)?;
        }
    }
    // dense Dijkstra from the identity
    let mut dist: Vec<Option<Scalar>> = vec![None; n];
    let mut done = vec![false; n];
    dist[id_pos] = Some(Scalar::zero());
    for _ in 0..n {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if done[i] || dist[i].is_none() {
                continue;
            }
            pick = match pick {
                None => Some(i),
                Some(p) => {
                    if dist[i].as_ref().unwrap().total_cmp(dist[p].as_ref().unwrap())
                        == std::cmp::Ordering::Less
                    {
                        Some(i)
                    } else {
                        Some(p)
                    }
                }
            };
        }
        let Some(u) = pick else { break };
        done[u] = true;
        let du = dist[u].clone().unwrap();
        for v in 0..n {
            if v == u {
                continue;
            }
            let nd = &du + &weights[u][v];
            let better = match &dist[v] {
                None => true,
                Some(cur) => nd.total_cmp(cur) == std::cmp::Ordering::Less,
            };
            if better {
                dist[v] = Some(nd);
            }
        }
    }
    let dist: Vec<Scalar> = dist.into_iter().map(|d| d.unwrap()).collect();
    for (i, g) in ball.iter().enumerate() {
        let lv = l.eval(g)?;
        if dist[i].lt(&lv) {
            // a path undercuts the direct edge: exhibit the violating pair
            for (j, h) in ball.iter().enumerate() {
                if j == i || j == id_pos {
                    continue;
                }
                let lh = l.eval(h)?;
                let via = &lh + &weights[i][j];
                if via.lt(&lv) {
                    return Err(Error::Validation(format!(
                        "A3 violation on the ball: l({h}) + l({g}*({h})^-1) = {via} < {lv} = l({g})"
                    )));
                }
            }
            return Err(Error::Validation(format!(
                "shortest path {} undercuts l({g}) = {lv}",
                dist[i]
            )));
        }
    }
    Ok(CompleteTruncation { elements: ball.to_vec(), weights, dist_from_identity: dist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::groups::GroupModel;

    fn z_standard() -> Arc<QuotientGGraph> {
        QuotientGGraph::from_json(fixtures::builtin_graph("z_standard").unwrap()).unwrap()
    }

    fn z_spur() -> Arc<QuotientGGraph> {
        QuotientGGraph::from_json(fixtures::builtin_graph("z_spur").unwrap()).unwrap()
    }

    fn f2_three_edge() -> Arc<QuotientGGraph> {
        QuotientGGraph::from_json(fixtures::builtin_graph("f2_three_edge").unwrap()).unwrap()
    }

    #[test]
    fn z_line_development() {
        let g = z_standard();
        let ball = g.develop(&Scalar::int(3)).unwrap();
        // path -3..3
        assert_eq!(ball.vertices.len(), 7);
        assert_eq!(ball.edges.len(), 6);
    }

    #[test]
    fn develop_radius_zero() {
        let g = z_standard();
        let ball = g.develop(&Scalar::zero()).unwrap();
        assert_eq!(ball.vertices.len(), 1);
        assert!(ball.edges.is_empty());
    }

    #[test]
    fn z_based_length_is_abs() {
        let g = z_standard();
        let four = g.model().parse_element("g0^4").unwrap();
        assert_eq!(g.distance(&four).unwrap(), Scalar::int(4));
        let bounded = g.based_length(&four, &Scalar::int(3)).unwrap();
        assert!(bounded.is_none());
    }

    #[test]
    fn spur_based_length_adds_eps() {
        // two-vertex quotient with a length-1 loop at v and a 1/4 spur u--v:
        // based at u, l(n) = |n| + 1/2 for n != 0
        let g = z_spur();
        for n in 1..=5i64 {
            let e = g.model().parse_element(&format!("g0^{n}")).unwrap();
            assert_eq!(g.distance(&e).unwrap(), Scalar::ratio(2 * n + 1, 2));
        }
        let ball = g.develop(&Scalar::int(2)).unwrap();
        // hand development: u-fiber at 0,±1 and v-fiber at 0,±1
        assert_eq!(ball.vertices.len(), 6);
    }

    #[test]
    fn three_edge_graph_conjugate_length() {
        // l(b) travels u -> v, around the v-loop, and back: 3
        let g = f2_three_edge();
        let b = g.model().parse_element("g1").unwrap();
        assert_eq!(g.distance(&b).unwrap(), Scalar::int(3));
        for n in 2..=4u32 {
            let bn = g.model().parse_element(&format!("g1^{n}")).unwrap();
            assert_eq!(g.distance(&bn).unwrap(), Scalar::int(n as i64 + 2));
        }
        let a = g.model().parse_element("g0").unwrap();
        assert_eq!(g.distance(&a).unwrap(), Scalar::int(1));
    }

    #[test]
    fn covering_radius_values() {
        assert_eq!(z_standard().covering_radius().unwrap(), Scalar::ratio(1, 2));
        assert_eq!(z_spur().covering_radius().unwrap(), Scalar::ratio(3, 4));
        assert_eq!(f2_three_edge().covering_radius().unwrap(), Scalar::ratio(3, 2));
        // one-vertex graph with loop length L has covering radius L/2
        let z = GroupModel::free_abelian(1).unwrap();
        let one = z.parse_element("g0").unwrap();
        let g = QuotientGGraph::new(
            z.clone(),
            vec!["p".into()],
            "p",
            vec![("p".into(), "p".into(), one, Scalar::int(5))],
        )
        .unwrap();
        assert_eq!(g.covering_radius().unwrap(), Scalar::ratio(5, 2));
    }

    #[test]
    fn spec_round_trip() {
        let g = f2_three_edge();
        let spec = g.to_spec();
        let text = serde_json::to_string(&spec).unwrap();
        let g2 = QuotientGGraph::from_json(&text).unwrap();
        let b2 = g2.model().parse_element("g1^2").unwrap();
        assert_eq!(g2.distance(&b2).unwrap(), Scalar::int(4));
    }

    #[test]
    fn unreachable_fiber_hits_cap() {
        // loop with voltage g0^2 only reaches even fibers; odd queries climb
        // the infinite even component until the cap trips
        let z = GroupModel::free_abelian(1).unwrap();
        let two = z.parse_element("g0^2").unwrap();
        let g = QuotientGGraph::new(
            z.clone(),
            vec!["p".into()],
            "p",
            vec![("p".into(), "p".into(), two, Scalar::int(1))],
        )
        .unwrap()
        .with_cap(100);
        let odd = g.model().parse_element("g0").unwrap();
        assert!(matches!(g.distance(&odd), Err(Error::Resource { .. })));
    }
}

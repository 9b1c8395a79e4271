//! Eager computation graph with reverse-mode differentiation.
//!
//! Every operation computes its value immediately and appends a node to the
//! graph. Node ids are handed out in creation order, so the node list is
//! already topologically sorted and the backward pass is a single reverse
//! sweep. A graph borrows the parameter store immutably; gradients are
//! returned separately, and the store can only be updated once every graph
//! over it has been dropped.

use super::{Gradients, NnError, ParamId, ParamStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Input,
    Param(ParamId),
    Lookup { table: ParamId, row: usize },
    Affine { w: ParamId, b: Option<ParamId>, xs: Vec<NodeId> },
    Tanh(NodeId),
    Sigmoid(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    AddConst(NodeId),
    Scale(NodeId, f64),
    Concat(Vec<NodeId>),
    Slice { x: NodeId, start: usize },
    Pick { x: NodeId, index: usize },
    Sum(Vec<NodeId>),
    Max { xs: Vec<NodeId>, arg: usize },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Param(_) => "param",
            Op::Lookup { .. } => "lookup",
            Op::Affine { .. } => "affine",
            Op::Tanh(_) => "tanh",
            Op::Sigmoid(_) => "sigmoid",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::AddConst(_) => "add_const",
            Op::Scale(..) => "scale",
            Op::Concat(_) => "concat",
            Op::Slice { .. } => "slice",
            Op::Pick { .. } => "pick",
            Op::Sum(_) => "sum",
            Op::Max { .. } => "max",
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Vec<f64>,
}

pub struct Graph<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
}

fn dim_err(op: &'static str, detail: String) -> NnError {
    NnError::Dimension { op, detail }
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn dim(&self, id: NodeId) -> usize {
        self.nodes[id.0].value.len()
    }

    /// Value of a one-element node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value[0]
    }

    /// Drops every node created after the first `len`. Ids at or past `len`
    /// must not be used again.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
    }

    /// Name of the operation that produced `id`.
    pub fn op_name(&self, id: NodeId) -> &'static str {
        self.nodes[id.0].op.name()
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        self.push(Op::Input, value)
    }

    pub fn zeros(&mut self, dim: usize) -> NodeId {
        self.input(vec![0.0; dim])
    }

    /// A whole parameter as a flat vector node.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        let value = self.params.value(id).data().to_vec();
        self.push(Op::Param(id), value)
    }

    /// Row `row` of a matrix parameter (embedding lookup).
    pub fn lookup(&mut self, table: ParamId, row: usize) -> Result<NodeId, NnError> {
        let t = self.params.value(table);
        if row >= t.rows() || t.shape().len() != 2 {
            return Err(NnError::IndexOutOfRange {
                op: "lookup",
                index: row,
                len: t.rows(),
            });
        }
        let value = t.row(row).to_vec();
        Ok(self.push(Op::Lookup { table, row }, value))
    }

    /// `W · (x_1 ∘ x_2 ∘ … ) + b` without materializing the concatenation.
    pub fn affine(&mut self, w: ParamId, b: Option<ParamId>, xs: &[NodeId]) -> Result<NodeId, NnError> {
        let wt = self.params.value(w);
        if wt.shape().len() != 2 {
            return Err(dim_err("affine", format!("weight has shape {:?}", wt.shape())));
        }
        let (rows, cols) = (wt.rows(), wt.cols());
        let input_dims: Vec<usize> = xs.iter().map(|&x| self.dim(x)).collect();
        let total: usize = input_dims.iter().sum();
        if total != cols {
            return Err(dim_err(
                "affine",
                format!("weight is {rows}x{cols} but inputs have dims {input_dims:?} (total {total})"),
            ));
        }
        let mut out = match b {
            Some(b) => {
                let bt = self.params.value(b);
                if bt.len() != rows {
                    return Err(dim_err(
                        "affine",
                        format!("weight is {rows}x{cols} but bias has shape {:?}", bt.shape()),
                    ));
                }
                bt.data().to_vec()
            }
            None => vec![0.0; rows],
        };
        let wd = wt.data();
        for (r, o) in out.iter_mut().enumerate() {
            let row = &wd[r * cols..(r + 1) * cols];
            let mut off = 0;
            let mut acc = 0.0;
            for &x in xs {
                let xv = &self.nodes[x.0].value;
                acc += dot(&row[off..off + xv.len()], xv);
                off += xv.len();
            }
            *o += acc;
        }
        Ok(self.push(
            Op::Affine {
                w,
                b,
                xs: xs.to_vec(),
            },
            out,
        ))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let value = self.nodes[x.0].value.iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh(x), value)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let value = self.nodes[x.0].value.iter().map(|&v| sigmoid(v)).collect();
        self.push(Op::Sigmoid(x), value)
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: NodeId,
        b: NodeId,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Vec<f64>, NnError> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.len() != bv.len() {
            return Err(dim_err(name, format!("operand dims {} and {}", av.len(), bv.len())));
        }
        Ok(av.iter().zip(bv).map(|(&x, &y)| f(x, y)).collect())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let v = self.binary("add", a, b, |x, y| x + y)?;
        Ok(self.push(Op::Add(a, b), v))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let v = self.binary("sub", a, b, |x, y| x - y)?;
        Ok(self.push(Op::Sub(a, b), v))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let v = self.binary("mul", a, b, |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), v))
    }

    pub fn add_const(&mut self, x: NodeId, c: f64) -> NodeId {
        let value = self.nodes[x.0].value.iter().map(|v| v + c).collect();
        self.push(Op::AddConst(x), value)
    }

    pub fn scale(&mut self, x: NodeId, k: f64) -> NodeId {
        let value = self.nodes[x.0].value.iter().map(|v| v * k).collect();
        self.push(Op::Scale(x, k), value)
    }

    pub fn concat(&mut self, xs: &[NodeId]) -> NodeId {
        let mut value = Vec::with_capacity(xs.iter().map(|&x| self.dim(x)).sum());
        for &x in xs {
            value.extend_from_slice(&self.nodes[x.0].value);
        }
        self.push(Op::Concat(xs.to_vec()), value)
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x.0].value;
        if start + len > xv.len() {
            return Err(dim_err(
                "slice",
                format!("range {}..{} of a {}-vector", start, start + len, xv.len()),
            ));
        }
        let value = xv[start..start + len].to_vec();
        Ok(self.push(Op::Slice { x, start }, value))
    }

    /// Element `index` of `x` as a scalar node.
    pub fn pick(&mut self, x: NodeId, index: usize) -> Result<NodeId, NnError> {
        let xv = &self.nodes[x.0].value;
        let v = *xv.get(index).ok_or(NnError::IndexOutOfRange {
            op: "pick",
            index,
            len: xv.len(),
        })?;
        Ok(self.push(Op::Pick { x, index }, vec![v]))
    }

    /// Elementwise sum of equally sized nodes.
    pub fn sum(&mut self, xs: &[NodeId]) -> Result<NodeId, NnError> {
        let first = *xs
            .first()
            .ok_or_else(|| dim_err("sum", "no operands".to_string()))?;
        let mut value = self.nodes[first.0].value.clone();
        for &x in &xs[1..] {
            let xv = &self.nodes[x.0].value;
            if xv.len() != value.len() {
                return Err(dim_err("sum", format!("operand dims {} and {}", value.len(), xv.len())));
            }
            value.iter_mut().zip(xv).for_each(|(a, b)| *a += b);
        }
        Ok(self.push(Op::Sum(xs.to_vec()), value))
    }

    /// Maximum of scalar nodes; the gradient flows to the first maximal operand.
    pub fn max(&mut self, xs: &[NodeId]) -> Result<NodeId, NnError> {
        if xs.is_empty() {
            return Err(dim_err("max", "no operands".to_string()));
        }
        let mut arg = 0;
        for (k, &x) in xs.iter().enumerate() {
            if self.dim(x) != 1 {
                return Err(dim_err("max", format!("operand {k} has dim {}", self.dim(x))));
            }
            if self.scalar(x) > self.scalar(xs[arg]) {
                arg = k;
            }
        }
        let v = self.scalar(xs[arg]);
        Ok(self.push(
            Op::Max {
                xs: xs.to_vec(),
                arg,
            },
            vec![v],
        ))
    }

    /// Gradients of a scalar `loss` with respect to every trainable parameter.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients, NnError> {
        let mut grads = Gradients::new(self.params);
        self.backward_into(loss, &mut grads)?;
        Ok(grads)
    }

    /// Like [`Graph::backward`], adding into an existing accumulator.
    pub fn backward_into(&self, loss: NodeId, grads: &mut Gradients) -> Result<(), NnError> {
        if self.dim(loss) != 1 {
            return Err(NnError::NonScalarLoss(self.dim(loss)));
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(p) => {
                    if self.params.get(*p).trainable {
                        axpy(grads.slot(self.params, *p).data_mut(), 1.0, &g);
                    }
                }
                Op::Lookup { table, row } => {
                    if self.params.get(*table).trainable {
                        axpy(grads.slot(self.params, *table).row_mut(*row), 1.0, &g);
                    }
                }
                Op::Affine { w, b, xs } => {
                    let wt = self.params.value(*w);
                    let cols = wt.cols();
                    if let Some(b) = b {
                        if self.params.get(*b).trainable {
                            axpy(grads.slot(self.params, *b).data_mut(), 1.0, &g);
                        }
                    }
                    if self.params.get(*w).trainable {
                        let gw = grads.slot(self.params, *w).data_mut();
                        for (r, &gr) in g.iter().enumerate() {
                            if gr == 0.0 {
                                continue;
                            }
                            let row = &mut gw[r * cols..(r + 1) * cols];
                            let mut off = 0;
                            for &x in xs {
                                let xv = &self.nodes[x.0].value;
                                axpy(&mut row[off..off + xv.len()], gr, xv);
                                off += xv.len();
                            }
                        }
                    }
                    let wd = wt.data();
                    let mut off = 0;
                    for &x in xs {
                        let n = self.nodes[x.0].value.len();
                        let mut dx = vec![0.0; n];
                        for (r, &gr) in g.iter().enumerate() {
                            if gr != 0.0 {
                                axpy(&mut dx, gr, &wd[r * cols + off..r * cols + off + n]);
                            }
                        }
                        accumulate(&mut adj, x, &dx);
                        off += n;
                    }
                }
                Op::Tanh(x) => {
                    let d: Vec<f64> = g
                        .iter()
                        .zip(&node.value)
                        .map(|(gi, y)| gi * (1.0 - y * y))
                        .collect();
                    accumulate(&mut adj, *x, &d);
                }
                Op::Sigmoid(x) => {
                    let d: Vec<f64> = g
                        .iter()
                        .zip(&node.value)
                        .map(|(gi, y)| gi * y * (1.0 - y))
                        .collect();
                    accumulate(&mut adj, *x, &d);
                }
                Op::Add(a, b) => {
                    accumulate(&mut adj, *a, &g);
                    accumulate(&mut adj, *b, &g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut adj, *a, &g);
                    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                    accumulate(&mut adj, *b, &neg);
                }
                Op::Mul(a, b) => {
                    let av = &self.nodes[a.0].value;
                    let bv = &self.nodes[b.0].value;
                    let da: Vec<f64> = g.iter().zip(bv).map(|(x, y)| x * y).collect();
                    let db: Vec<f64> = g.iter().zip(av).map(|(x, y)| x * y).collect();
                    accumulate(&mut adj, *a, &da);
                    accumulate(&mut adj, *b, &db);
                }
                Op::AddConst(x) => accumulate(&mut adj, *x, &g),
                Op::Scale(x, k) => {
                    let d: Vec<f64> = g.iter().map(|v| v * k).collect();
                    accumulate(&mut adj, *x, &d);
                }
                Op::Concat(xs) => {
                    let mut off = 0;
                    for &x in xs {
                        let n = self.nodes[x.0].value.len();
                        accumulate(&mut adj, x, &g[off..off + n]);
                        off += n;
                    }
                }
                Op::Slice { x, start } => {
                    let n = self.nodes[x.0].value.len();
                    let mut d = vec![0.0; n];
                    d[*start..*start + g.len()].copy_from_slice(&g);
                    accumulate(&mut adj, *x, &d);
                }
                Op::Pick { x, index } => {
                    let n = self.nodes[x.0].value.len();
                    let mut d = vec![0.0; n];
                    d[*index] = g[0];
                    accumulate(&mut adj, *x, &d);
                }
                Op::Sum(xs) => {
                    for &x in xs {
                        accumulate(&mut adj, x, &g);
                    }
                }
                Op::Max { xs, arg } => accumulate(&mut adj, xs[*arg], &g),
            }
        }
        Ok(())
    }
}

fn accumulate(adj: &mut [Option<Vec<f64>>], id: NodeId, d: &[f64]) {
    match &mut adj[id.0] {
        Some(acc) => axpy(acc, 1.0, d),
        slot @ None => *slot = Some(d.to_vec()),
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

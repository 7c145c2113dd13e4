//! Dense row-major tensors with outer products, contractions and the
//! generalized (paired) dot product.
//!
//! A [`Tensor`] is a flat element buffer plus a [`Shape`]. Element access,
//! contraction and products all walk the buffer through row-major strides, so
//! the layout is deterministic and matches the JSON form
//! `{"shape": [..], "data": [..]}`.
//!
//! The generalized dot product [`dot`] pairs axes of two tensors, forms the
//! products of all entries whose indices agree on every paired axis, and sums
//! them. Matrix multiplication is the special case that pairs the last axis of
//! the left operand with the first axis of the right one:
//!
//! ```
//! use tensor_chain::tensor::{dot, AxisPairing, Tensor};
//!
//! let a = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
//! let b = Tensor::from_vec(&[2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
//! let c = dot(&a, &b, &AxisPairing::single(1, 0)).unwrap();
//! assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
//! ```

use std::collections::HashSet;
use std::fmt;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("every axis extent must be at least 1, got {0:?}")]
    ZeroExtent(Vec<usize>),
    #[error("data length {len} does not match shape {shape:?} ({expected} elements)")]
    DataLength {
        shape: Vec<usize>,
        len: usize,
        expected: usize,
    },
    #[error("index {index:?} out of range for shape {shape:?}")]
    IndexOutOfRange {
        index: Vec<usize>,
        shape: Vec<usize>,
    },
    #[error("axis {axis} out of range for a rank-{rank} tensor")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),
    #[error("invalid axis permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("element domain mismatch: {left} vs {right}")]
    DomainMismatch { left: Domain, right: Domain },
    #[error("malformed tensor JSON: {0}")]
    Json(String),
}

pub type Result<T, E = TensorError> = std::result::Result<T, E>;

/// The element domain of a tensor. One domain per tensor; conversions between
/// domains are always explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Rational,
    Float,
    Symbolic,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Rational => "rational",
            Domain::Float => "float",
            Domain::Symbolic => "symbolic",
        })
    }
}

/// Axis extents of a tensor. Rank 0 is a scalar with a single element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(TensorError::ZeroExtent(dims));
        }
        Ok(Shape(dims))
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Number of elements (1 for a scalar).
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for axis in (0..self.0.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.0[axis + 1];
        }
        strides
    }

    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.0.len() || index.iter().zip(&self.0).any(|(i, d)| i >= d) {
            return Err(TensorError::IndexOutOfRange {
                index: index.to_vec(),
                shape: self.0.clone(),
            });
        }
        Ok(index.iter().zip(self.strides()).map(|(i, s)| i * s).sum())
    }

    /// All multi-indices in row-major order.
    pub fn indices(&self) -> Indices {
        Indices {
            dims: self.0.clone(),
            next: Some(vec![0; self.0.len()]),
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.rank() {
            return Err(TensorError::AxisOutOfRange {
                axis,
                rank: self.rank(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Row-major multi-index iterator.
#[derive(Debug, Clone)]
pub struct Indices {
    dims: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Indices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut axis = succ.len();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            succ[axis] += 1;
            if succ[axis] < self.dims[axis] {
                self.next = Some(succ);
                break;
            }
            succ[axis] = 0;
        }
        Some(current)
    }
}

/// Scalar types a tensor can hold.
pub trait Element: Clone + PartialEq + fmt::Debug {
    const DOMAIN: Domain;

    fn zero() -> Self;
    fn add_elem(&self, rhs: &Self) -> Self;
    fn mul_elem(&self, rhs: &Self) -> Self;

    fn sum<'a, I>(items: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        Self: 'a,
    {
        items
            .into_iter()
            .fold(Self::zero(), |acc, x| acc.add_elem(x))
    }

    fn sum_of_products<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (&'a Self, &'a Self)>,
        Self: 'a,
    {
        terms
            .into_iter()
            .fold(Self::zero(), |acc, (a, b)| acc.add_elem(&a.mul_elem(b)))
    }
}

impl Element for f64 {
    const DOMAIN: Domain = Domain::Float;

    fn zero() -> Self {
        0.0
    }
    fn add_elem(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul_elem(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

impl Element for BigRational {
    const DOMAIN: Domain = Domain::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn add_elem(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul_elem(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

/// Dense tensor in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Element> Tensor<T> {
    pub fn new(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(TensorError::DataLength {
                expected: shape.len(),
                shape: shape.0,
                len: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn from_vec(dims: &[usize], data: Vec<T>) -> Result<Self> {
        Self::new(Shape::new(dims.to_vec())?, data)
    }

    pub fn scalar(value: T) -> Self {
        Tensor {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let data = shape.indices().map(|idx| f(&idx)).collect();
        Tensor { shape, data }
    }

    pub fn filled(shape: Shape, value: T) -> Self {
        let data = vec![value; shape.len()];
        Tensor { shape, data }
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::filled(shape, T::zero())
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Result<&T> {
        Ok(&self.data[self.shape.offset(index)?])
    }

    /// The single element of a rank-0 tensor.
    pub fn as_scalar(&self) -> Option<&T> {
        (self.rank() == 0).then(|| &self.data[0])
    }

    pub fn map<U: Element>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U: Element, E>(
        &self,
        f: impl FnMut(&T) -> std::result::Result<U, E>,
    ) -> std::result::Result<Tensor<U>, E> {
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .map(f)
                .collect::<std::result::Result<_, _>>()?,
        })
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(&T, &T) -> T) -> Result<Self> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(format!(
                "elementwise operation on {} and {}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// Elementwise sum of two tensors of equal shape.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add_elem(b))
    }

    pub fn scale(&self, factor: &T) -> Self {
        self.map(|x| factor.mul_elem(x))
    }

    pub fn is_zero(&self) -> bool {
        let zero = T::zero();
        self.data.iter().all(|x| *x == zero)
    }
}

/// Validated list of `(axis in a, axis in b)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxisPairing {
    pairs: Vec<(usize, usize)>,
}

impl AxisPairing {
    /// Checks that left axes are distinct and right axes are distinct. Extent
    /// agreement is checked against concrete shapes when the pairing is used.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let mut left = HashSet::new();
        let mut right = HashSet::new();
        for &(p, q) in &pairs {
            if !left.insert(p) {
                return Err(TensorError::InvalidPairing(format!(
                    "left axis {p} paired twice"
                )));
            }
            if !right.insert(q) {
                return Err(TensorError::InvalidPairing(format!(
                    "right axis {q} paired twice"
                )));
            }
        }
        Ok(AxisPairing { pairs })
    }

    pub fn none() -> Self {
        AxisPairing::default()
    }

    pub fn single(p: usize, q: usize) -> Self {
        AxisPairing {
            pairs: vec![(p, q)],
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn validate(&self, a: &Shape, b: &Shape) -> Result<()> {
        for &(p, q) in &self.pairs {
            a.check_axis(p)?;
            b.check_axis(q)?;
            if a.dims()[p] != b.dims()[q] {
                return Err(TensorError::ShapeMismatch(format!(
                    "paired axes ({p}, {q}) have extents {} and {}",
                    a.dims()[p],
                    b.dims()[q]
                )));
            }
        }
        Ok(())
    }
}

/// Outer product: `result[i, j] = a[i] * b[j]`, shape `a.shape ++ b.shape`.
pub fn tensor_product<T: Element>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    let mut data = Vec::with_capacity(a.data.len() * b.data.len());
    for x in &a.data {
        for y in &b.data {
            data.push(x.mul_elem(y));
        }
    }
    Tensor {
        shape: Shape(dims),
        data,
    }
}

/// Sums over the diagonal of axes `p` and `q`, dropping both. Remaining axes
/// keep their relative order.
pub fn contract<T: Element>(a: &Tensor<T>, p: usize, q: usize) -> Result<Tensor<T>> {
    a.shape.check_axis(p)?;
    a.shape.check_axis(q)?;
    if p == q {
        return Err(TensorError::InvalidPairing(format!(
            "cannot contract axis {p} with itself"
        )));
    }
    let dims = a.dims();
    if dims[p] != dims[q] {
        return Err(TensorError::ShapeMismatch(format!(
            "contracted axes ({p}, {q}) have extents {} and {}",
            dims[p], dims[q]
        )));
    }
    let strides = a.shape.strides();
    let kept: Vec<usize> = (0..a.rank()).filter(|&ax| ax != p && ax != q).collect();
    let out_shape = Shape(kept.iter().map(|&ax| dims[ax]).collect());
    let diag_stride = strides[p] + strides[q];
    let data = out_shape
        .indices()
        .map(|idx| {
            let base: usize = idx.iter().zip(&kept).map(|(i, &ax)| i * strides[ax]).sum();
            T::sum((0..dims[p]).map(|k| &a.data[base + k * diag_stride]))
        })
        .collect();
    Ok(Tensor {
        shape: out_shape,
        data,
    })
}

/// Generalized dot product. Equivalent to [`tensor_product`] followed by a
/// contraction over every pair, computed in one pass. The result carries the
/// unpaired axes of `a` (in order) followed by the unpaired axes of `b`.
pub fn dot<T: Element>(a: &Tensor<T>, b: &Tensor<T>, pairing: &AxisPairing) -> Result<Tensor<T>> {
    pairing.validate(&a.shape, &b.shape)?;
    let a_strides = a.shape.strides();
    let b_strides = b.shape.strides();
    let a_kept: Vec<usize> = (0..a.rank())
        .filter(|ax| !pairing.pairs.iter().any(|&(p, _)| p == *ax))
        .collect();
    let b_kept: Vec<usize> = (0..b.rank())
        .filter(|ax| !pairing.pairs.iter().any(|&(_, q)| q == *ax))
        .collect();

    let mut out_dims: Vec<usize> = a_kept.iter().map(|&ax| a.dims()[ax]).collect();
    out_dims.extend(b_kept.iter().map(|&ax| b.dims()[ax]));
    let out_shape = Shape(out_dims);

    // offsets of every paired multi-index, precomputed once
    let paired_shape = Shape(pairing.pairs.iter().map(|&(p, _)| a.dims()[p]).collect());
    let paired_offsets: Vec<(usize, usize)> = paired_shape
        .indices()
        .map(|k| {
            k.iter()
                .zip(&pairing.pairs)
                .fold((0, 0), |(oa, ob), (&k, &(p, q))| {
                    (oa + k * a_strides[p], ob + k * b_strides[q])
                })
        })
        .collect();

    let split = a_kept.len();
    let data = out_shape
        .indices()
        .map(|idx| {
            let base_a: usize = idx[..split]
                .iter()
                .zip(&a_kept)
                .map(|(i, &ax)| i * a_strides[ax])
                .sum();
            let base_b: usize = idx[split..]
                .iter()
                .zip(&b_kept)
                .map(|(i, &ax)| i * b_strides[ax])
                .sum();
            T::sum_of_products(
                paired_offsets
                    .iter()
                    .map(|&(oa, ob)| (&a.data[base_a + oa], &b.data[base_b + ob])),
            )
        })
        .collect();
    Ok(Tensor {
        shape: out_shape,
        data,
    })
}

/// Reorders axes: axis `k` of the result is axis `perm[k]` of `a`.
pub fn permute_axes<T: Element>(a: &Tensor<T>, perm: &[usize]) -> Result<Tensor<T>> {
    let rank = a.rank();
    let mut seen = vec![false; rank];
    if perm.len() != rank
        || perm
            .iter()
            .any(|&ax| ax >= rank || std::mem::replace(&mut seen[ax], true))
    {
        return Err(TensorError::InvalidPermutation(perm.to_vec()));
    }
    let in_strides = a.shape.strides();
    let out_shape = Shape(perm.iter().map(|&ax| a.dims()[ax]).collect());
    let data = out_shape
        .indices()
        .map(|idx| {
            let off: usize = idx
                .iter()
                .zip(perm)
                .map(|(i, &ax)| i * in_strides[ax])
                .sum();
            a.data[off].clone()
        })
        .collect();
    Ok(Tensor {
        shape: out_shape,
        data,
    })
}

/// True iff `a` is unchanged by every permutation of the listed axes.
pub fn is_symmetric_in_axes<T: Element>(a: &Tensor<T>, axes: &[usize]) -> Result<bool> {
    let mut seen = HashSet::new();
    for &ax in axes {
        a.shape.check_axis(ax)?;
        if !seen.insert(ax) {
            return Err(TensorError::InvalidPairing(format!(
                "axis {ax} listed twice"
            )));
        }
    }
    let Some((&first, rest)) = axes.split_first() else {
        return Ok(true);
    };
    let extent = a.dims()[first];
    if let Some(&bad) = rest.iter().find(|&&ax| a.dims()[ax] != extent) {
        return Err(TensorError::ShapeMismatch(format!(
            "axes {first} and {bad} have extents {extent} and {}",
            a.dims()[bad]
        )));
    }
    // transpositions (first, other) generate the full symmetric group
    let strides = a.shape.strides();
    for &other in rest {
        for (pos, idx) in a.shape.indices().enumerate() {
            let (i, j) = (idx[first], idx[other]);
            if i >= j {
                continue;
            }
            let swapped = pos + (j - i) * strides[first] - (j - i) * strides[other];
            if a.data[pos] != a.data[swapped] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl Tensor<BigRational> {
    pub fn to_f64(&self) -> Tensor<f64> {
        self.map(|x| x.to_f64().unwrap_or(f64::NAN))
    }
}

impl Tensor<f64> {
    /// Exact rational image of every float.
    pub fn to_rational(&self) -> Result<Tensor<BigRational>> {
        self.try_map(|&x| {
            BigRational::from_float(x)
                .ok_or_else(|| TensorError::Json(format!("non-finite value {x}")))
        })
    }
}

/// A tensor whose element domain is known only at runtime, e.g. after
/// reading JSON. Operations on mismatched domains fail instead of coercing.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Rational(Tensor<BigRational>),
    Float(Tensor<f64>),
    Symbolic(Tensor<crate::expr::Expr>),
}

macro_rules! same_domain {
    ($a:expr, $b:expr, |$x:ident, $y:ident| $body:expr) => {
        match ($a, $b) {
            (AnyTensor::Rational($x), AnyTensor::Rational($y)) => Ok(AnyTensor::Rational($body?)),
            (AnyTensor::Float($x), AnyTensor::Float($y)) => Ok(AnyTensor::Float($body?)),
            (AnyTensor::Symbolic($x), AnyTensor::Symbolic($y)) => Ok(AnyTensor::Symbolic($body?)),
            (l, r) => Err(TensorError::DomainMismatch {
                left: l.domain(),
                right: r.domain(),
            }),
        }
    };
}

impl AnyTensor {
    pub fn domain(&self) -> Domain {
        match self {
            AnyTensor::Rational(_) => Domain::Rational,
            AnyTensor::Float(_) => Domain::Float,
            AnyTensor::Symbolic(_) => Domain::Symbolic,
        }
    }

    pub fn shape(&self) -> &Shape {
        match self {
            AnyTensor::Rational(t) => t.shape(),
            AnyTensor::Float(t) => t.shape(),
            AnyTensor::Symbolic(t) => t.shape(),
        }
    }

    pub fn tensor_product(&self, other: &AnyTensor) -> Result<AnyTensor> {
        same_domain!(self, other, |a, b| Ok::<_, TensorError>(tensor_product(
            a, b
        )))
    }

    pub fn dot(&self, other: &AnyTensor, pairing: &AxisPairing) -> Result<AnyTensor> {
        same_domain!(self, other, |a, b| dot(a, b, pairing))
    }

    pub fn contract(&self, p: usize, q: usize) -> Result<AnyTensor> {
        Ok(match self {
            AnyTensor::Rational(t) => AnyTensor::Rational(contract(t, p, q)?),
            AnyTensor::Float(t) => AnyTensor::Float(contract(t, p, q)?),
            AnyTensor::Symbolic(t) => AnyTensor::Symbolic(contract(t, p, q)?),
        })
    }

    pub fn permute_axes(&self, perm: &[usize]) -> Result<AnyTensor> {
        Ok(match self {
            AnyTensor::Rational(t) => AnyTensor::Rational(permute_axes(t, perm)?),
            AnyTensor::Float(t) => AnyTensor::Float(permute_axes(t, perm)?),
            AnyTensor::Symbolic(t) => AnyTensor::Symbolic(permute_axes(t, perm)?),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyTensor::Rational(t) => t.to_json(),
            AnyTensor::Float(t) => t.to_json(),
            AnyTensor::Symbolic(t) => t.to_json(),
        }
    }

    /// Reads `{"shape", "data"}`. Any string element makes the tensor
    /// symbolic; otherwise all-integer data is rational and anything else is
    /// float.
    pub fn from_json(value: &Value) -> Result<AnyTensor> {
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| TensorError::Json("missing \"data\" array".into()))?;
        if data.iter().any(Value::is_string) {
            Ok(AnyTensor::Symbolic(Tensor::from_json(value)?))
        } else if data.iter().all(|v| v.is_i64() || v.is_u64()) {
            Ok(AnyTensor::Rational(Tensor::from_json(value)?))
        } else {
            Ok(AnyTensor::Float(Tensor::from_json(value)?))
        }
    }
}

/// Elements with a JSON representation: a number, or a string in the
/// expression grammar.
pub trait JsonElement: Element {
    fn to_json(&self) -> Value;
    fn from_json(value: &Value) -> std::result::Result<Self, String>;
}

impl JsonElement for f64 {
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }

    fn from_json(value: &Value) -> std::result::Result<Self, String> {
        value
            .as_f64()
            .ok_or_else(|| format!("expected a number, got {value}"))
    }
}

impl JsonElement for BigRational {
    fn to_json(&self) -> Value {
        if self.is_integer() {
            if let Some(n) = self.to_integer().to_i64() {
                return Value::from(n);
            }
        }
        Value::String(crate::expr::format_rational(self))
    }

    fn from_json(value: &Value) -> std::result::Result<Self, String> {
        match value {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(BigRational::from_integer(BigInt::from(i)))
                } else if let Some(u) = n.as_u64() {
                    Ok(BigRational::from_integer(BigInt::from(u)))
                } else {
                    n.as_f64()
                        .and_then(BigRational::from_float)
                        .ok_or_else(|| format!("non-finite number {n}"))
                }
            }
            Value::String(s) => crate::expr::parse_rational(s)
                .ok_or_else(|| format!("not a rational literal: {s:?}")),
            other => Err(format!("expected a number, got {other}")),
        }
    }
}

impl<T: JsonElement> Tensor<T> {
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("shape".into(), Value::from(self.dims().to_vec()));
        obj.insert(
            "data".into(),
            Value::Array(self.data.iter().map(JsonElement::to_json).collect()),
        );
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let dims = value
            .get("shape")
            .and_then(Value::as_array)
            .ok_or_else(|| TensorError::Json("missing \"shape\" array".into()))?
            .iter()
            .map(|d| {
                d.as_u64()
                    .map(|d| d as usize)
                    .ok_or_else(|| TensorError::Json(format!("bad extent {d}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| TensorError::Json("missing \"data\" array".into()))?
            .iter()
            .map(|v| T::from_json(v).map_err(TensorError::Json))
            .collect::<Result<Vec<_>>>()?;
        Tensor::new(Shape::new(dims)?, data)
    }
}

fn write_nested<T: fmt::Display>(
    f: &mut dyn fmt::Write,
    dims: &[usize],
    data: &[T],
) -> fmt::Result {
    match dims.split_first() {
        None => write!(f, "{}", data[0]),
        Some((&n, rest)) => {
            let chunk = data.len() / n;
            f.write_str("[")?;
            for i in 0..n {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_nested(f, rest, &data[i * chunk..(i + 1) * chunk])?;
            }
            f.write_str("]")
        }
    }
}

/// Nested-bracket rendering of row-major `data` with extents `dims`.
pub fn format_nested<T: fmt::Display>(dims: &[usize], data: &[T]) -> String {
    let mut out = String::new();
    write_nested(&mut out, dims, data).expect("writing to a String");
    out
}

impl<T: Element + fmt::Display> fmt::Display for Tensor<T> {
    /// Nested-bracket form, e.g. `[[2, 0], [0, 200]]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_nested(f, self.dims(), &self.data)
    }
}

/// Shorthand for building exact rational tensors from integers.
pub fn rational_tensor(dims: &[usize], data: &[i64]) -> Result<Tensor<BigRational>> {
    Tensor::from_vec(
        dims,
        data.iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect(),
    )
}

/// Identity matrix of size `n`.
pub fn identity<T: Element>(n: usize, one: T) -> Result<Tensor<T>> {
    let shape = Shape::new(vec![n, n])?;
    Ok(Tensor::from_fn(shape, |idx| {
        if idx[0] == idx[1] {
            one.clone()
        } else {
            T::zero()
        }
    }))
}

/// Rational identity matrix.
pub fn rational_identity(n: usize) -> Result<Tensor<BigRational>> {
    identity(n, BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(dims: &[usize], data: &[i64]) -> Tensor<BigRational> {
        rational_tensor(dims, data).unwrap()
    }

    #[test]
    fn shape_rejects_zero_extent() {
        assert!(matches!(
            Shape::new(vec![2, 0]),
            Err(TensorError::ZeroExtent(_))
        ));
        assert_eq!(Shape::scalar().len(), 1);
    }

    #[test]
    fn data_length_is_checked() {
        let err = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(
            err,
            TensorError::DataLength {
                expected: 4,
                len: 3,
                ..
            }
        ));
    }

    #[test]
    fn element_access_rejects_out_of_range() {
        let t = rt(&[2, 3], &[1, 2, 3, 4, 5, 6]);
        assert_eq!(
            t.get(&[1, 2]).unwrap(),
            &BigRational::from_integer(6.into())
        );
        assert!(t.get(&[2, 0]).is_err());
        assert!(t.get(&[0]).is_err());
    }

    #[test]
    fn indices_are_row_major() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let all: Vec<_> = shape.indices().collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(Shape::scalar().indices().count(), 1);
    }

    #[test]
    fn tensor_product_examples() {
        let s = rt(&[], &[3]);
        let v = rt(&[2], &[1, 2]);
        assert_eq!(tensor_product(&s, &v), rt(&[2], &[3, 6]));

        let e0 = rt(&[2], &[1, 0]);
        let e1 = rt(&[2], &[0, 1]);
        assert_eq!(tensor_product(&e0, &e1), rt(&[2, 2], &[0, 1, 0, 0]));

        // enumerated by hand: [1,2] ⊗ ones(2,2) has entry index0 + 1
        let ones = rt(&[2, 2], &[1, 1, 1, 1]);
        let t = tensor_product(&v, &ones);
        assert_eq!(t.dims(), &[2, 2, 2]);
        assert_eq!(t, rt(&[2, 2, 2], &[1, 1, 1, 1, 2, 2, 2, 2]));
    }

    #[test]
    fn contract_examples() {
        let id = rational_identity(2).unwrap();
        assert_eq!(contract(&id, 0, 1).unwrap(), rt(&[], &[2]));

        let ones = rt(&[2, 3, 2], &[1; 12]);
        assert_eq!(contract(&ones, 0, 2).unwrap(), rt(&[3], &[2, 2, 2]));

        let a = rt(&[2, 2], &[1, 2, 3, 4]);
        let b = rt(&[2, 2], &[5, 6, 7, 8]);
        let ab = contract(&tensor_product(&a, &b), 1, 2).unwrap();
        assert_eq!(ab, rt(&[2, 2], &[19, 22, 43, 50]));
    }

    #[test]
    fn contract_errors() {
        let t = rt(&[2, 3], &[0; 6]);
        assert!(matches!(
            contract(&t, 0, 1),
            Err(TensorError::ShapeMismatch(_))
        ));
        assert!(matches!(
            contract(&t, 1, 1),
            Err(TensorError::InvalidPairing(_))
        ));
        assert!(matches!(
            contract(&t, 0, 5),
            Err(TensorError::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn dot_examples() {
        let a = rt(&[2, 2], &[1, 2, 3, 4]);
        let id = rational_identity(2).unwrap();
        assert_eq!(dot(&a, &id, &AxisPairing::single(1, 0)).unwrap(), a);

        let b = rt(&[2, 2], &[5, 6, 7, 8]);
        assert_eq!(
            dot(&a, &b, &AxisPairing::single(1, 0)).unwrap(),
            rt(&[2, 2], &[19, 22, 43, 50])
        );

        let v = rt(&[3], &[1, 2, 3]);
        assert_eq!(
            dot(&v, &v, &AxisPairing::single(0, 0)).unwrap(),
            rt(&[], &[14])
        );
    }

    #[test]
    fn dot_empty_pairing_is_tensor_product() {
        let a = rt(&[2], &[1, -2]);
        let b = rt(&[3], &[4, 5, 6]);
        assert_eq!(
            dot(&a, &b, &AxisPairing::none()).unwrap(),
            tensor_product(&a, &b)
        );
    }

    #[test]
    fn dot_multiple_pairs_full_contraction() {
        // Frobenius inner product
        let a = rt(&[2, 2], &[1, 2, 3, 4]);
        let b = rt(&[2, 2], &[5, 6, 7, 8]);
        let pairing = AxisPairing::new([(0, 0), (1, 1)]).unwrap();
        assert_eq!(dot(&a, &b, &pairing).unwrap(), rt(&[], &[70]));
    }

    #[test]
    fn pairing_validation() {
        assert!(AxisPairing::new([(0, 0), (0, 1)]).is_err());
        assert!(AxisPairing::new([(0, 1), (1, 1)]).is_err());
        let a = rt(&[2, 3], &[0; 6]);
        let b = rt(&[2], &[0; 2]);
        assert!(matches!(
            dot(&a, &b, &AxisPairing::single(1, 0)),
            Err(TensorError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn permute_examples() {
        let a = rt(&[2, 2], &[1, 2, 3, 4]);
        assert_eq!(permute_axes(&a, &[0, 1]).unwrap(), a);
        assert_eq!(
            permute_axes(&a, &[1, 0]).unwrap(),
            rt(&[2, 2], &[1, 3, 2, 4])
        );

        let t = Tensor::from_fn(Shape::new(vec![2, 3, 4]).unwrap(), |i| {
            (i[0] * 100 + i[1] * 10 + i[2]) as f64
        });
        let p = permute_axes(&t, &[2, 0, 1]).unwrap();
        assert_eq!(p.dims(), &[4, 2, 3]);
        assert_eq!(p.get(&[3, 1, 2]).unwrap(), t.get(&[1, 2, 3]).unwrap());
    }

    #[test]
    fn permute_rejects_invalid() {
        let a = rt(&[2, 2], &[1, 2, 3, 4]);
        assert!(permute_axes(&a, &[0, 0]).is_err());
        assert!(permute_axes(&a, &[0]).is_err());
        assert!(permute_axes(&a, &[0, 2]).is_err());
    }

    #[test]
    fn symmetry_examples() {
        assert!(is_symmetric_in_axes(&rt(&[2, 2], &[1, 2, 2, 5]), &[0, 1]).unwrap());
        assert!(!is_symmetric_in_axes(&rt(&[2, 2], &[1, 2, 3, 4]), &[0, 1]).unwrap());
        let t = rt(&[2, 3], &[0; 6]);
        assert!(is_symmetric_in_axes(&t, &[0, 1]).is_err());
        assert!(is_symmetric_in_axes(&t, &[1]).unwrap());
    }

    #[test]
    fn symmetry_three_axes() {
        let sym = Tensor::from_fn(Shape::new(vec![2, 3, 3, 3]).unwrap(), |i| {
            let mut s = i[1..].to_vec();
            s.sort();
            (i[0] * 1000 + s[0] * 100 + s[1] * 10 + s[2]) as f64
        });
        assert!(is_symmetric_in_axes(&sym, &[1, 2, 3]).unwrap());
        assert!(is_symmetric_in_axes(&sym, &[0, 1]).is_err());
        let skew = Tensor::from_fn(Shape::new(vec![3, 3, 3]).unwrap(), |i| {
            (i[0] * 9 + i[1] * 3 + i[2]) as f64
        });
        assert!(!is_symmetric_in_axes(&skew, &[0, 1, 2]).unwrap());
        // symmetric in the first two, not the third
        let partial = Tensor::from_fn(Shape::new(vec![3, 3, 3]).unwrap(), |i| {
            ((i[0] + i[1]) * 10 + i[2]) as f64
        });
        assert!(is_symmetric_in_axes(&partial, &[0, 1]).unwrap());
        assert!(!is_symmetric_in_axes(&partial, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn any_tensor_rejects_mixed_domains() {
        let r = AnyTensor::Rational(rt(&[2], &[1, 2]));
        let f = AnyTensor::Float(Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap());
        assert!(matches!(
            r.tensor_product(&f),
            Err(TensorError::DomainMismatch {
                left: Domain::Rational,
                right: Domain::Float
            })
        ));
        assert!(r.dot(&r, &AxisPairing::single(0, 0)).is_ok());
    }

    #[test]
    fn json_form() {
        let t = rt(&[2, 2], &[1, 0, 0, 200]);
        let json = t.to_json();
        assert_eq!(
            json,
            serde_json::json!({"shape": [2, 2], "data": [1, 0, 0, 200]})
        );
        assert_eq!(Tensor::<BigRational>::from_json(&json).unwrap(), t);
        assert_eq!(
            AnyTensor::from_json(&json).unwrap().domain(),
            Domain::Rational
        );

        let half = Tensor::scalar(BigRational::new(1.into(), 3.into()));
        let json = half.to_json();
        assert_eq!(json["data"][0], "1/3");
        assert_eq!(Tensor::<BigRational>::from_json(&json).unwrap(), half);

        let bad = serde_json::json!({"shape": [3], "data": [1, 2]});
        assert!(Tensor::<f64>::from_json(&bad).is_err());
    }

    #[test]
    fn display_nested() {
        let t = rt(&[2, 2], &[2, 0, 0, 200]);
        assert_eq!(t.to_string(), "[[2, 0], [0, 200]]");
        assert_eq!(rt(&[], &[7]).to_string(), "7");
    }
}

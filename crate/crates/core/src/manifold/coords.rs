use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Ambient representation shared by points and tangent vectors.
///
/// Euclidean and hyperboloid data are flat vectors (the hyperboloid uses the
/// n+1 Minkowski coordinates), SPD data are symmetric matrices and product
/// data hold one entry per factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Coords {
    Vector(Vec<f64>),
    Matrix(SymMatrix),
    Product(Vec<Coords>),
}

impl Coords {
    pub fn zeros_like(&self) -> Coords {
        match self {
            Coords::Vector(v) => Coords::Vector(vec![0.0; v.len()]),
            Coords::Matrix(m) => Coords::Matrix(SymMatrix::zeros(m.dim())),
            Coords::Product(cs) => Coords::Product(cs.iter().map(Coords::zeros_like).collect()),
        }
    }

    pub fn scale(&self, a: f64) -> Coords {
        match self {
            Coords::Vector(v) => Coords::Vector(v.iter().map(|x| a * x).collect()),
            Coords::Matrix(m) => Coords::Matrix(m.scale(a)),
            Coords::Product(cs) => Coords::Product(cs.iter().map(|c| c.scale(a)).collect()),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, a: f64, other: &Coords) -> Result<Coords> {
        match (self, other) {
            (Coords::Vector(x), Coords::Vector(y)) => {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        actual: y.len(),
                    });
                }
                Ok(Coords::Vector(
                    x.iter().zip(y).map(|(p, q)| p + a * q).collect(),
                ))
            }
            (Coords::Matrix(x), Coords::Matrix(y)) => Ok(Coords::Matrix(x.add_scaled(a, y)?)),
            (Coords::Product(xs), Coords::Product(ys)) => {
                if xs.len() != ys.len() {
                    return Err(Error::DimensionMismatch {
                        expected: xs.len(),
                        actual: ys.len(),
                    });
                }
                xs.iter()
                    .zip(ys)
                    .map(|(x, y)| x.add_scaled(a, y))
                    .collect::<Result<Vec<_>>>()
                    .map(Coords::Product)
            }
            _ => Err(Error::InvalidTangent("coordinate kinds differ".into())),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Coords::Vector(v) => v.iter().all(|x| x.is_finite()),
            Coords::Matrix(m) => m.is_finite(),
            Coords::Product(cs) => cs.iter().all(Coords::is_finite),
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Coords::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&SymMatrix> {
        match self {
            Coords::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_product(&self) -> Option<&[Coords]> {
        match self {
            Coords::Product(cs) => Some(cs),
            _ => None,
        }
    }
}

/// A point on a manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Coords,
}

impl Point {
    pub fn new(coords: Coords) -> Self {
        Self { coords }
    }

    pub fn vector(v: Vec<f64>) -> Self {
        Self::new(Coords::Vector(v))
    }

    pub fn matrix(m: SymMatrix) -> Self {
        Self::new(Coords::Matrix(m))
    }

    pub fn product(parts: Vec<Point>) -> Self {
        Self::new(Coords::Product(
            parts.into_iter().map(|p| p.coords).collect(),
        ))
    }

    /// Number of factors for product points; 1 otherwise.
    pub fn n_components(&self) -> usize {
        self.coords.as_product().map_or(1, <[Coords]>::len)
    }

    /// Factor `i` of a product point (the point itself for i = 0 otherwise).
    pub fn component(&self, i: usize) -> Point {
        match &self.coords {
            Coords::Product(cs) => Point::new(cs[i].clone()),
            c => {
                assert_eq!(i, 0, "component index out of range");
                Point::new(c.clone())
            }
        }
    }

    pub fn components(&self) -> Vec<Point> {
        (0..self.n_components())
            .map(|i| self.component(i))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.is_finite()
    }
}

/// A tangent vector together with the point it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub coords: Coords,
}

impl TangentVector {
    pub fn new(base: Point, coords: Coords) -> Self {
        Self { base, coords }
    }

    pub fn zero(base: &Point) -> Self {
        Self {
            coords: base.coords.zeros_like(),
            base: base.clone(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            base: self.base.clone(),
            coords: self.coords.scale(a),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// `self + a·other`; both must share the base point.
    pub fn add_scaled(&self, a: f64, other: &TangentVector) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::BasePointMismatch);
        }
        Ok(Self {
            base: self.base.clone(),
            coords: self.coords.add_scaled(a, &other.coords)?,
        })
    }

    pub fn add(&self, other: &TangentVector) -> Result<Self> {
        self.add_scaled(1.0, other)
    }

    pub fn sub(&self, other: &TangentVector) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// Factor `i` of a product tangent vector, based at factor `i` of the base.
    pub fn component(&self, i: usize) -> TangentVector {
        match &self.coords {
            Coords::Product(cs) => TangentVector::new(self.base.component(i), cs[i].clone()),
            c => {
                assert_eq!(i, 0, "component index out of range");
                TangentVector::new(self.base.clone(), c.clone())
            }
        }
    }

    /// Reassembles a product tangent vector from factor vectors.
    pub fn from_components(base: &Point, parts: Vec<TangentVector>) -> Result<Self> {
        if parts.len() != base.n_components() {
            return Err(Error::DimensionMismatch {
                expected: base.n_components(),
                actual: parts.len(),
            });
        }
        for (i, part) in parts.iter().enumerate() {
            if part.base != base.component(i) {
                return Err(Error::BasePointMismatch);
            }
        }
        let coords = match &base.coords {
            Coords::Product(_) => Coords::Product(parts.into_iter().map(|p| p.coords).collect()),
            _ => parts.into_iter().next().map(|p| p.coords).unwrap(),
        };
        Ok(Self::new(base.clone(), coords))
    }

    pub fn is_finite(&self) -> bool {
        self.coords.is_finite()
    }
}

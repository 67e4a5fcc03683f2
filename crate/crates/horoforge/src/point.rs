//! Point encodings shared by every geometry.
//!
//! A bifunctional evaluates on two point domains M and N whose elements may be
//! real vectors, upper-half-plane parameters, facet indices of a polytope,
//! weighted slope currents on the torus, or bare real parameters. `Point` is
//! the common carrier; `Domain` describes which encoding a factor accepts and
//! validates candidates against it.

use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometries::torus::SlopeCurrent;

/// A point of M or N in one of the supported encodings.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// Dimensionless real vector.
    Vector(Vec<f64>),
    /// Complex number with strictly positive imaginary part.
    HalfPlane(Complex64),
    /// Index into the facet list of a polytope.
    Facet(usize),
    /// Weighted set of slopes on the torus.
    Current(SlopeCurrent),
    /// Bare real parameter.
    Param(f64),
}

impl Point {
    pub fn vector(coords: impl Into<Vec<f64>>) -> Self {
        Point::Vector(coords.into())
    }

    pub fn half_plane(re: f64, im: f64) -> Self {
        Point::HalfPlane(Complex64::new(re, im))
    }

    /// Short human-readable rendering used in reports and error messages.
    pub fn describe(&self) -> String {
        match self {
            Point::Vector(v) => format!(
                "({})",
                v.iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Point::HalfPlane(z) => {
                if z.im >= 0.0 {
                    format!("{}+{}i", z.re, z.im)
                } else {
                    format!("{}{}i", z.re, z.im)
                }
            }
            Point::Facet(i) => format!("facet#{i}"),
            Point::Current(c) => c.describe(),
            Point::Param(t) => format!("t={t}"),
        }
    }

    pub fn encoding_name(&self) -> &'static str {
        match self {
            Point::Vector(_) => "real-vector",
            Point::HalfPlane(_) => "complex-upper-half-plane",
            Point::Facet(_) => "facet-index",
            Point::Current(_) => "slope-current",
            Point::Param(_) => "real-parameter",
        }
    }

    pub fn as_vector(&self) -> Result<&[f64]> {
        match self {
            Point::Vector(v) => Ok(v),
            other => Err(Error::InvalidPoint(format!(
                "expected real-vector, got {}",
                other.encoding_name()
            ))),
        }
    }

    pub fn as_half_plane(&self) -> Result<Complex64> {
        match self {
            Point::HalfPlane(z) => Ok(*z),
            other => Err(Error::InvalidPoint(format!(
                "expected complex-upper-half-plane, got {}",
                other.encoding_name()
            ))),
        }
    }

    pub fn as_facet(&self) -> Result<usize> {
        match self {
            Point::Facet(i) => Ok(*i),
            other => Err(Error::InvalidPoint(format!(
                "expected facet-index, got {}",
                other.encoding_name()
            ))),
        }
    }

    pub fn as_current(&self) -> Result<&SlopeCurrent> {
        match self {
            Point::Current(c) => Ok(c),
            other => Err(Error::InvalidPoint(format!(
                "expected slope-current, got {}",
                other.encoding_name()
            ))),
        }
    }

    pub fn as_param(&self) -> Result<f64> {
        match self {
            Point::Param(t) => Ok(*t),
            other => Err(Error::InvalidPoint(format!(
                "expected real-parameter, got {}",
                other.encoding_name()
            ))),
        }
    }

    /// Coordinate-wise closeness used for landmark distinctness and lookups.
    pub fn close_to(&self, other: &Point, tol: f64) -> bool {
        match (self, other) {
            (Point::Vector(a), Point::Vector(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
            }
            (Point::HalfPlane(a), Point::HalfPlane(b)) => {
                (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol
            }
            (Point::Facet(a), Point::Facet(b)) => a == b,
            (Point::Current(a), Point::Current(b)) => a.close_to(b, tol),
            (Point::Param(a), Point::Param(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Vector(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
            Point::HalfPlane(z) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
            Point::Facet(i) => s.serialize_u64(*i as u64),
            Point::Current(c) => c.serialize(s),
            Point::Param(t) => s.serialize_f64(*t),
        }
    }
}

/// Descriptor of the point encoding a factor of a bifunctional accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Real vectors of the given dimension.
    RealVector { dim: usize },
    /// Real vectors of the given dimension excluding the origin.
    RealVectorNonzero { dim: usize },
    /// Upper half plane, Im >= floor.
    UpperHalfPlane { im_floor: f64 },
    /// Facet indices 0..count of a polytope.
    FacetIndex { count: usize },
    /// Interior points of a planar polytope (validated by the geometry).
    PolytopeInterior { dim: usize },
    /// Slope currents on the torus.
    SlopeCurrents,
    /// Bare real parameters.
    RealParam,
}

impl Domain {
    pub fn name(&self) -> String {
        match self {
            Domain::RealVector { dim } => format!("real-vector[{dim}]"),
            Domain::RealVectorNonzero { dim } => format!("real-vector[{dim}] \\ {{0}}"),
            Domain::UpperHalfPlane { .. } => "complex-upper-half-plane".into(),
            Domain::FacetIndex { count } => format!("facet-index[0..{count}]"),
            Domain::PolytopeInterior { dim } => format!("polytope-interior[{dim}]"),
            Domain::SlopeCurrents => "slope-current".into(),
            Domain::RealParam => "real-parameter".into(),
        }
    }

    /// Checks both the encoding and the domain invariants.
    pub fn validate(&self, p: &Point) -> Result<()> {
        let mismatch = |side: &'static str| Error::DomainMismatch {
            side,
            expected: self.name(),
            got: p.encoding_name().into(),
        };
        match (self, p) {
            (Domain::RealVector { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::InvalidPoint(format!(
                        "expected dimension {dim}, got {}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Domain::RealVectorNonzero { dim }, Point::Vector(v)) => {
                Domain::RealVector { dim: *dim }.validate(p)?;
                if v.iter().map(|x| x * x).sum::<f64>() == 0.0 {
                    return Err(Error::InvalidPoint(
                        "zero vector is excluded from this domain".into(),
                    ));
                }
                Ok(())
            }
            (Domain::UpperHalfPlane { im_floor }, Point::HalfPlane(z)) => {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                if z.im < *im_floor {
                    return Err(Error::InvalidPoint(format!(
                        "imaginary part {} below floor {im_floor}",
                        z.im
                    )));
                }
                Ok(())
            }
            (Domain::FacetIndex { count }, Point::Facet(i)) => {
                if *i >= *count {
                    return Err(Error::InvalidPoint(format!(
                        "facet index {i} out of range 0..{count}"
                    )));
                }
                Ok(())
            }
            (Domain::PolytopeInterior { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::InvalidPoint(format!(
                        "expected dimension {dim}, got {}",
                        v.len()
                    )));
                }
                Ok(())
            }
            (Domain::SlopeCurrents, Point::Current(c)) => c.validate(),
            (Domain::RealParam, Point::Param(t)) => {
                if !t.is_finite() {
                    return Err(Error::InvalidPoint("non-finite parameter".into()));
                }
                Ok(())
            }
            _ => Err(mismatch("given")),
        }
    }
}

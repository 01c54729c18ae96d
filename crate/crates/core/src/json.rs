//! Input documents read by the CLI and the FFI layer.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::backforth::{Catalog, RadoEmbedding, RatMap};
use crate::clone::{close_fragment, CloneFragment, DEFAULT_OP_CAP};
use crate::error::{Error, Result};
use crate::fnspace::{Bijection, Carrier, Elem, FinOp};
use crate::monoid::{close_under_composition, MonoidSet};
use crate::structures::{PartialIso, RelStructure, Symbol};

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// An operation on `{0..n-1}`: a named Boolean operation or an explicit
/// table in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpDoc {
    Named(String),
    Table { arity: usize, table: Vec<u32> },
}

impl OpDoc {
    pub fn to_op(&self, carrier: &Carrier) -> Result<FinOp> {
        match self {
            OpDoc::Table { arity, table } => FinOp::from_table(carrier, *arity, table.clone()),
            OpDoc::Named(name) => {
                if carrier != &Carrier::Finite(2) {
                    return Err(Error::Invalid(format!("named operation {name:?} needs the 2-element carrier")));
                }
                let (arity, table) = boolean_op(name).ok_or_else(|| Error::Invalid(format!("unknown operation {name:?}")))?;
                FinOp::from_table(carrier, arity, table)
            }
        }
    }
}

/// Tables of the named Boolean operations.
pub fn boolean_op(name: &str) -> Option<(usize, Vec<u32>)> {
    Some(match name.to_ascii_uppercase().as_str() {
        "ID" => (1, vec![0, 1]),
        "NOT" => (1, vec![1, 0]),
        "C0" => (1, vec![0, 0]),
        "C1" => (1, vec![1, 1]),
        "AND" => (2, vec![0, 0, 0, 1]),
        "OR" => (2, vec![0, 1, 1, 1]),
        "XOR" => (2, vec![0, 1, 1, 0]),
        "NAND" => (2, vec![1, 1, 1, 0]),
        "NOR" => (2, vec![1, 0, 0, 0]),
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentDoc {
    pub carrier: usize,
    #[serde(default)]
    pub max_arity: Option<usize>,
    pub generators: Vec<OpDoc>,
}

impl FragmentDoc {
    pub fn close(&self, default_arity: usize, cap: Option<usize>) -> Result<CloneFragment> {
        let c = Carrier::finite(self.carrier)?;
        let gens = self.generators.iter().map(|g| g.to_op(&c)).collect::<Result<Vec<_>>>()?;
        close_fragment(&c, &gens, self.max_arity.unwrap_or(default_arity), cap.unwrap_or(DEFAULT_OP_CAP))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm41Doc {
    pub source: FragmentDoc,
    /// Permutation table of `θ`.
    pub theta: Vec<u32>,
    /// Defaults to the conjugate of the source by `θ`.
    #[serde(default)]
    pub target: Option<FragmentDoc>,
    /// Check every homomorphism into the target instead of the conjugation.
    #[serde(default)]
    pub all_homs: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomsDoc {
    pub source: FragmentDoc,
    pub target: FragmentDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub name: String,
    pub arity: usize,
    pub tuples: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureDoc {
    Catalog { catalog: String },
    Family {
        family: String,
        #[serde(default)]
        n: usize,
        #[serde(default)]
        parts: Vec<usize>,
    },
    Graph { size: usize, edges: Vec<(u32, u32)> },
    Relations { size: usize, relations: Vec<RelationDoc> },
}

impl StructureDoc {
    pub fn build(&self) -> Result<RelStructure> {
        match self {
            StructureDoc::Catalog { catalog } => RelStructure::catalog(catalog),
            StructureDoc::Family { family, n, parts } => match family.as_str() {
                "cycle" => RelStructure::cycle(*n),
                "path" => RelStructure::path(*n),
                "complete" => RelStructure::complete(*n),
                "edgeless" => RelStructure::edgeless(*n),
                "complete-multipartite" => RelStructure::complete_multipartite(parts),
                _ => Err(Error::Invalid(format!("unknown family {family:?}"))),
            },
            StructureDoc::Graph { size, edges } => RelStructure::graph(*size, edges),
            StructureDoc::Relations { size, relations } => RelStructure::finite(
                *size,
                relations.iter().map(|r| Symbol { name: r.name.clone(), arity: r.arity }).collect(),
                relations.iter().map(|r| r.tuples.clone()).collect(),
            ),
        }
    }
}

/// A monoid on `{0..n-1}` given by generator tables, and a set of maps
/// to be fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidDoc {
    pub carrier: usize,
    pub monoid: Vec<Vec<u32>>,
    /// Close the generators under composition (otherwise they must already
    /// form a monoid).
    #[serde(default = "yes")]
    pub close: bool,
    #[serde(default)]
    pub fixed: Vec<Vec<u32>>,
    /// Expected number of injective endomorphisms fixing `fixed`; when
    /// absent the check is that only the identity remains.
    #[serde(default)]
    pub expected: Option<usize>,
}

fn yes() -> bool {
    true
}

impl MonoidDoc {
    pub fn build(&self) -> Result<(MonoidSet, Vec<FinOp>)> {
        let c = Carrier::finite(self.carrier)?;
        let gens = self.monoid.iter().map(|t| FinOp::from_table(&c, 1, t.clone())).collect::<Result<Vec<_>>>()?;
        let m = if self.close { close_under_composition(&c, &gens)? } else { MonoidSet::from_ops(&c, gens)? };
        let fixed = self.fixed.iter().map(|t| FinOp::from_table(&c, 1, t.clone())).collect::<Result<Vec<_>>>()?;
        Ok((m, fixed))
    }
}

/// Finite density question: is the group dense in the monoid at `window`?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityDoc {
    pub carrier: usize,
    pub group: Vec<Vec<u32>>,
    pub monoid: Vec<Vec<u32>>,
    pub window: Vec<u64>,
}

/// A map on a catalog structure: a closed-form rational map, a
/// back-and-forth automorphism from a seed, or a forward-only Rado
/// embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapDoc {
    Rational(RatMap),
    Embedding { seed: PartialIso, avoid: Vec<u64> },
    Automorphism { seed: PartialIso },
}

impl MapDoc {
    pub fn to_op(&self, catalog: Catalog) -> Result<FinOp> {
        match (self, catalog) {
            (MapDoc::Rational(m), Catalog::RationalsOrder) => Ok(m.to_op()),
            (MapDoc::Embedding { seed, avoid }, Catalog::Rado) => Ok(RadoEmbedding::new(seed.clone(), avoid.clone())?.into_op()),
            (MapDoc::Automorphism { seed }, _) => {
                Ok(crate::backforth::LazyAutomorphism::new(catalog, seed.clone())?.shared().to_bijection().forward().clone())
            }
            _ => Err(Error::Invalid(format!("map does not live on {}", catalog.name()))),
        }
    }

    /// The map as a bijection; only surjective maps qualify.
    pub fn to_bijection(&self, catalog: Catalog) -> Result<Bijection> {
        match (self, catalog) {
            (MapDoc::Rational(RatMap::Affine { slope, shift }), Catalog::RationalsOrder) => {
                let fwd = RatMap::affine(slope.clone(), shift.clone())?;
                let bwd = RatMap::affine(slope.recip(), -shift / slope)?;
                Bijection::from_pair(fwd.to_op(), bwd.to_op())
            }
            (MapDoc::Automorphism { seed }, _) => {
                Ok(crate::backforth::LazyAutomorphism::new(catalog, seed.clone())?.shared().to_bijection())
            }
            _ => Err(Error::NotBijective),
        }
    }
}

/// Explicit extension probes on a catalog structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionDoc {
    pub catalog: String,
    pub theta: MapDoc,
    pub f: MapDoc,
    /// Second map for the homomorphism law; defaults to `f`.
    #[serde(default)]
    pub f2: Option<MapDoc>,
    pub points: Vec<Elem>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnspace::rat;

    #[test]
    fn parses_documents() {
        let f: FragmentDoc = serde_json::from_str(r#"{"carrier":2,"generators":["NOT",{"arity":2,"table":[0,0,0,1]}]}"#).unwrap();
        assert_eq!(f.close(2, None).unwrap().profile(), vec![4, 16]);

        let s: StructureDoc = serde_json::from_str(r#"{"size":4,"edges":[[0,1],[1,2],[2,3]]}"#).unwrap();
        assert_eq!(s.build().unwrap().size(), Some(4));
        let s: StructureDoc = serde_json::from_str(r#"{"family":"complete-multipartite","parts":[2,2]}"#).unwrap();
        assert_eq!(s.build().unwrap().size(), Some(4));
        let s: StructureDoc = serde_json::from_str(r#"{"catalog":"rado"}"#).unwrap();
        assert_eq!(s.build().unwrap().name(), Some("rado"));

        let m: MonoidDoc = serde_json::from_str(r#"{"carrier":2,"monoid":[[1,0]],"fixed":[[0,1]]}"#).unwrap();
        let (m, fixed) = m.build().unwrap();
        assert_eq!((m.len().unwrap(), fixed.len()), (2, 1));

        let e: ExtensionDoc = serde_json::from_str(
            r#"{"catalog":"rationals-order","theta":{"kind":"affine","slope":"1","shift":"1"},
                "f":{"kind":"affine","slope":"2","shift":"0"},"points":["3"]}"#,
        )
        .unwrap();
        let theta = e.theta.to_bijection(Catalog::RationalsOrder).unwrap();
        assert_eq!(theta.unapply(&Elem::Rat(rat(3, 1))).unwrap(), Elem::Rat(rat(2, 1)));
        assert!(e.f.to_bijection(Catalog::RationalsOrder).is_ok());
        assert!(MapDoc::Rational(RatMap::Squash).to_bijection(Catalog::RationalsOrder).is_err());
    }
}

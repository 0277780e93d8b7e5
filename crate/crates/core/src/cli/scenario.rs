//! Scenario files: JSON with exact weights written as `"p/q"` strings.
//! The full format is documented in `docs/format.md`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AffineMap, Builtin, GridDomain, GridFunction};
use crate::measure::{AtomMap, AtomicMeasureSpace};
use crate::orlicz::OrliczFunction;
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub carrier: CarrierSpec,
    pub transformation: TransformationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orlicz: Option<OrliczSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CarrierSpec {
    Atomic { atoms: Vec<String>, weights: Vec<String> },
    Grid { bounds: Vec<[f64; 2]>, resolution: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformationSpec {
    /// Atom id to atom id.
    Atomic { mapping: BTreeMap<String, String> },
    Affine {
        #[serde(alias = "A")]
        matrix: Vec<Vec<f64>>,
        #[serde(alias = "b")]
        offset: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrliczSpec {
    Power { p: f64 },
    PowerLog { p: f64 },
    ExpMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    Linear,
    Quadratic,
    Product,
    Hat,
    Bump,
    CustomTable { values: Vec<f64> },
}

impl FunctionSpec {
    fn builtin(&self) -> Option<Builtin> {
        match self {
            FunctionSpec::Zero => Some(Builtin::Zero),
            FunctionSpec::Linear => Some(Builtin::Linear),
            FunctionSpec::Quadratic => Some(Builtin::Quadratic),
            FunctionSpec::Product => Some(Builtin::Product),
            FunctionSpec::Hat => Some(Builtin::Hat),
            FunctionSpec::Bump => Some(Builtin::Bump),
            FunctionSpec::CustomTable { .. } => None,
        }
    }
}

/// A scenario after every invariant has been checked.
#[derive(Debug, Clone)]
pub enum Model {
    Atomic(AtomicModel),
    Grid(GridModel),
}

#[derive(Debug, Clone)]
pub struct AtomicModel {
    pub space: AtomicMeasureSpace,
    pub map: AtomMap,
    pub phi: Option<OrliczFunction>,
    pub function: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct GridModel {
    pub domain: GridDomain,
    pub map: AffineMap,
    pub phi: Option<OrliczFunction>,
    pub function: Option<FunctionSpec>,
}

impl GridModel {
    /// Samples the scenario function on `domain`. Tables only fit the
    /// scenario's own resolution.
    pub fn sample(&self, domain: &GridDomain) -> Result<Option<GridFunction>> {
        match &self.function {
            None => Ok(None),
            Some(FunctionSpec::CustomTable { values }) => {
                if values.len() != domain.len() {
                    return Err(Error::Scenario(format!(
                        "function.values: {} samples for a grid of {} cells",
                        values.len(),
                        domain.len()
                    )));
                }
                Ok(Some(GridFunction::new(values.clone())?))
            }
            Some(spec) => Ok(spec.builtin().map(|b| b.sample(domain))),
        }
    }
}

fn field<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Scenario(msg) => Error::Scenario(format!("{path}: {msg}")),
        other => Error::Scenario(format!("{path}: {other}")),
    })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// A replayable atomic scenario for an in-memory instance.
    pub fn from_atomic(name: Option<String>, space: &AtomicMeasureSpace, map: &AtomMap) -> Self {
        let ids = space.atoms();
        Scenario {
            name,
            carrier: CarrierSpec::Atomic {
                atoms: ids.to_vec(),
                weights: space.weights().iter().map(format_rational).collect(),
            },
            transformation: TransformationSpec::Atomic {
                mapping: (0..map.len()).map(|x| (ids[x].clone(), ids[map.apply(x)].clone())).collect(),
            },
            orlicz: None,
            function: None,
        }
    }

    pub fn build(&self) -> Result<Model> {
        let phi = self
            .orlicz
            .as_ref()
            .map(|o| {
                field(
                    "orlicz",
                    match *o {
                        OrliczSpec::Power { p } => OrliczFunction::power(p),
                        OrliczSpec::PowerLog { p } => OrliczFunction::power_log(p),
                        OrliczSpec::ExpMinus => Ok(OrliczFunction::exp_minus()),
                    },
                )
            })
            .transpose()?;
        match (&self.carrier, &self.transformation) {
            (CarrierSpec::Atomic { atoms, weights }, TransformationSpec::Atomic { mapping }) => {
                let weights = weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| field(&format!("carrier.weights[{i}]"), parse_rational(w)))
                    .collect::<Result<Vec<_>>>()?;
                let space = field("carrier", AtomicMeasureSpace::new(atoms.clone(), weights))?;
                let map = build_atom_map(&space, mapping)?;
                let function = match &self.function {
                    None => None,
                    Some(FunctionSpec::Zero) => Some(vec![0.0; space.len()]),
                    Some(FunctionSpec::CustomTable { values }) => {
                        if values.len() != space.len() {
                            return Err(Error::Scenario(format!(
                                "function.values: {} samples for {} atoms",
                                values.len(),
                                space.len()
                            )));
                        }
                        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                            return Err(Error::Scenario(format!("function.values[{i}] is not finite")));
                        }
                        Some(values.clone())
                    }
                    Some(other) => {
                        return Err(Error::Scenario(format!(
                            "function.tag: `{}` needs a grid carrier; atomic carriers take `zero` or `custom-table`",
                            other.builtin().map_or("?", Builtin::name)
                        )))
                    }
                };
                Ok(Model::Atomic(AtomicModel {
                    space,
                    map,
                    phi,
                    function,
                }))
            }
            (CarrierSpec::Grid { bounds, resolution }, TransformationSpec::Affine { matrix, offset }) => {
                let domain = field(
                    "carrier",
                    GridDomain::new(bounds.iter().map(|b| (b[0], b[1])).collect(), resolution.clone()),
                )?;
                let map = field("transformation", AffineMap::new(matrix.clone(), offset.clone()))?;
                if map.dim() != domain.dim() {
                    return Err(Error::Scenario(format!(
                        "transformation: {}-dimensional map on a {}-dimensional grid",
                        map.dim(),
                        domain.dim()
                    )));
                }
                field("transformation", map.check_self_map(&domain))?;
                let model = GridModel {
                    domain,
                    map,
                    phi,
                    function: self.function.clone(),
                };
                field("function", model.sample(&model.domain))?;
                Ok(Model::Grid(model))
            }
            _ => Err(Error::Scenario(
                "transformation: atomic carriers need an atomic mapping, grid carriers an affine map".into(),
            )),
        }
    }
}

fn build_atom_map(space: &AtomicMeasureSpace, mapping: &BTreeMap<String, String>) -> Result<AtomMap> {
    let mut images = vec![None; space.len()];
    for (from, to) in mapping {
        let x = space
            .index_of(from)
            .ok_or_else(|| Error::Scenario(format!("transformation.mapping: unknown atom `{from}`")))?;
        let a = space
            .index_of(to)
            .ok_or_else(|| Error::Scenario(format!("transformation.mapping[{from}]: unknown atom `{to}`")))?;
        images[x] = Some(a);
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(x, a)| {
            a.ok_or_else(|| {
                Error::Scenario(format!("transformation.mapping: atom `{}` has no image", space.atoms()[x]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    field("transformation", AtomMap::new(images))
}

//! Map-spec and scene-spec files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pcmap::billiard::{FieldPiece, LengthMode, Point, PolygonScene};
use pcmap::rational::{self, Rational};
use pcmap::{AffinePiece, Error, PiecewiseAffineContraction, SidedInterval};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub slope: String,
    pub intercept: String,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSpecFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
    /// Interior breakpoints `x_1 < … < x_{n-1}`.
    pub breakpoints: Vec<String>,
    pub pieces: Vec<PieceSpec>,
}

fn field(value: &str, location: &str) -> Result<Rational, Error> {
    rational::parse(value).map_err(|e| Error::Parse(format!("{location}: {e}")))
}

impl MapSpecFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes") + "\n"
    }

    /// Parses every field; does not validate.
    pub fn pieces(&self) -> Result<Vec<AffinePiece>, Error> {
        if self.pieces.len() != self.breakpoints.len() + 1 {
            return Err(Error::Parse(format!(
                "pieces: {} pieces need {} breakpoints, found {}",
                self.pieces.len(),
                self.pieces.len().saturating_sub(1),
                self.breakpoints.len()
            )));
        }
        let mut xs = vec![rational::zero()];
        for (i, b) in self.breakpoints.iter().enumerate() {
            xs.push(field(b, &format!("breakpoints[{i}]"))?);
        }
        xs.push(rational::one());
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let slope = field(&p.slope, &format!("pieces[{i}].slope"))?;
                let intercept = field(&p.intercept, &format!("pieces[{i}].intercept"))?;
                let domain = SidedInterval::new(xs[i].clone(), xs[i + 1].clone(), p.lo_closed, p.hi_closed)
                    .ok_or_else(|| Error::Parse(format!("pieces[{i}]: empty domain [{}, {}]", xs[i], xs[i + 1])))?;
                Ok(AffinePiece::new(slope, intercept, domain))
            })
            .collect()
    }

    pub fn to_map(&self) -> Result<PiecewiseAffineContraction, Error> {
        PiecewiseAffineContraction::new(self.pieces()?)
    }

    pub fn from_map(name: &str, notes: &str, map: &PiecewiseAffineContraction) -> Self {
        Self {
            name: name.to_string(),
            notes: notes.to_string(),
            breakpoints: map.interior_breakpoints().iter().map(rational::to_pq).collect(),
            pieces: map
                .pieces()
                .iter()
                .map(|p| PieceSpec {
                    slope: rational::to_pq(&p.slope),
                    intercept: rational::to_pq(&p.intercept),
                    lo_closed: p.domain.lo_closed,
                    hi_closed: p.domain.hi_closed,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub lo: String,
    pub hi: String,
    pub direction: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpecFile {
    #[serde(default)]
    pub name: String,
    /// Counterclockwise.
    pub vertices: Vec<[String; 2]>,
    /// One direction per edge; alternative to `field`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_fields: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Vec<FieldSpec>>,
    /// Opt into approximate arclength with this many bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximate_bits: Option<u32>,
}

fn point(p: &[String; 2], location: &str) -> Result<Point, Error> {
    Ok(Point::new(field(&p[0], &format!("{location}[0]"))?, field(&p[1], &format!("{location}[1]"))?))
}

impl SceneSpecFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn to_scene(&self) -> Result<PolygonScene, Error> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| point(v, &format!("vertices[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mode = match self.approximate_bits {
            Some(precision) => LengthMode::Approximate { precision },
            None => LengthMode::Exact,
        };
        match (&self.edge_fields, &self.field) {
            (Some(dirs), None) => {
                let dirs = dirs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| point(d, &format!("edge_fields[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                PolygonScene::with_edge_fields(vertices, dirs, mode)
            }
            (None, Some(arcs)) => {
                let arcs = arcs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        Ok(FieldPiece {
                            lo: field(&a.lo, &format!("field[{i}].lo"))?,
                            hi: field(&a.hi, &format!("field[{i}].hi"))?,
                            direction: point(&a.direction, &format!("field[{i}].direction"))?,
                        })
                    })
                    .collect::<Result<Vec<_>, Error>>()?;
                PolygonScene::new(vertices, arcs, mode)
            }
            _ => Err(Error::Parse("exactly one of edge_fields and field is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcmap::fixtures;

    #[test]
    fn round_trip_fixtures() {
        for (name, map) in fixtures::all() {
            let spec = MapSpecFile::from_map(name, "", &map);
            let back = MapSpecFile::from_json(&spec.to_json()).unwrap();
            assert_eq!(back, spec);
            assert_eq!(back.to_map().unwrap(), map);
        }
    }

    #[test]
    fn parse_errors_name_the_field() {
        let text = r#"{"breakpoints": ["1/2"], "pieces": [
            {"slope": "x", "intercept": "0", "lo_closed": true, "hi_closed": false},
            {"slope": "1/2", "intercept": "0", "lo_closed": true, "hi_closed": false}]}"#;
        let err = MapSpecFile::from_json(text).unwrap().to_map().unwrap_err();
        assert!(err.to_string().contains("pieces[0].slope"), "{err}");
        let err = MapSpecFile::from_json("{\"breakpoints\": [").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }
}

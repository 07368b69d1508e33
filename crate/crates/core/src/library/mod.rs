//! Block units extracted from decomposed instances and the structure library
//! that stores them.

mod unit;

pub use unit::{
    extract_block_units, extract_frame, reassemble, BlockUnit, HostFrame, Provenance, UnitCol,
    UnitRow,
};

use std::collections::BTreeMap;
use std::io::{Read, Write};

use flate2::read::GzDecoder;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::detect::{BlockPartition, DetectorParams};
use crate::milp::{hex, MilpInstance};
use crate::scalar::Scalar;

pub const LIBRARY_FORMAT: &str = "blockforge-structure-library";
pub const LIBRARY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no eligible unit to sample")]
    NoEligibleUnit,
    #[error("unit does not fit: {0}")]
    Mismatch(String),
    #[error("library file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("library file was written for {found}, loading as {expected}")]
    ScalarMismatch { found: String, expected: &'static str },
    #[error("corrupt library payload: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub name: String,
    pub hash: String,
    pub units: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryMeta {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorParams>,
    /// SHA-256 over the coefficient hashes of the corpus, in order.
    pub corpus_hash: String,
    pub sources: Vec<SourceEntry>,
}

/// Immutable pool of block units with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StructureLibrary<T> {
    pub meta: LibraryMeta,
    pub units: Vec<BlockUnit<T>>,
}

/// Restricts which units `sample_unit` may return.
#[derive(Clone, Debug, Default)]
pub struct UnitFilter<'a> {
    pub exclude_source: Option<&'a str>,
    /// Only units whose border strip fits this many host border columns.
    pub max_border_arity: Option<usize>,
}

impl UnitFilter<'_> {
    pub fn accepts<T: Scalar>(&self, u: &BlockUnit<T>) -> bool {
        self.exclude_source.is_none_or(|s| u.provenance.source != s)
            && self.max_border_arity.is_none_or(|a| u.border_arity() <= a)
    }
}

/// Extracts every unit of every (instance, partition) pair.
pub fn build_library<T: Scalar>(
    corpus: &[(MilpInstance<T>, BlockPartition)],
) -> Result<StructureLibrary<T>, LibraryError> {
    if corpus.is_empty() {
        return Err(LibraryError::EmptyCorpus);
    }
    let mut units = Vec::new();
    let mut sources = Vec::with_capacity(corpus.len());
    let mut h = Sha256::new();
    for (inst, part) in corpus {
        let extracted = extract_block_units(inst, part)?;
        let hash = inst.coefficient_hash();
        h.update(hash.as_bytes());
        sources.push(SourceEntry { name: inst.name.clone(), hash, units: extracted.len() });
        units.extend(extracted);
    }
    Ok(StructureLibrary {
        meta: LibraryMeta {
            format: LIBRARY_FORMAT.into(),
            version: LIBRARY_VERSION,
            scalar: T::NAME.into(),
            detector: corpus[0].1.params,
            corpus_hash: hex(&h.finalize()),
            sources,
        },
        units,
    })
}

impl<T: Scalar> StructureLibrary<T> {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Unit indices grouped by source instance name.
    pub fn by_source(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut m: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, u) in self.units.iter().enumerate() {
            m.entry(u.provenance.source.as_str()).or_default().push(i);
        }
        m
    }

    /// Uniform draw among the units accepted by `filter`.
    pub fn sample_unit<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        filter: &UnitFilter,
    ) -> Result<&BlockUnit<T>, LibraryError> {
        let eligible: Vec<&BlockUnit<T>> = self.units.iter().filter(|u| filter.accepts(*u)).collect();
        if eligible.is_empty() {
            return Err(LibraryError::NoEligibleUnit);
        }
        Ok(eligible[rng.random_range(0..eligible.len())])
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("library serializes");
        s.push('\n');
        s
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<(), LibraryError> {
        w.write_all(self.to_json().as_bytes())?;
        Ok(())
    }

    /// Reads a plain or gzip-compressed library.
    pub fn load<R: Read>(mut r: R) -> Result<Self, LibraryError> {
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.starts_with(&[0x1f, 0x8b]) {
            let mut out = Vec::new();
            GzDecoder::new(raw.as_slice())
                .read_to_end(&mut out)
                .map_err(|e| LibraryError::Corrupt(e.to_string()))?;
            raw = out;
        }
        let v: serde_json::Value =
            serde_json::from_slice(&raw).map_err(|e| LibraryError::Corrupt(e.to_string()))?;
        let meta = v.get("meta").ok_or_else(|| LibraryError::Corrupt("missing meta".into()))?;
        if meta.get("format").and_then(|f| f.as_str()) != Some(LIBRARY_FORMAT) {
            return Err(LibraryError::Corrupt("not a structure library".into()));
        }
        let version = meta.get("version").and_then(|f| f.as_u64()).unwrap_or(0) as u32;
        if version != LIBRARY_VERSION {
            return Err(LibraryError::VersionMismatch { found: version, expected: LIBRARY_VERSION });
        }
        let scalar = meta.get("scalar").and_then(|f| f.as_str()).unwrap_or("");
        if scalar != T::NAME {
            return Err(LibraryError::ScalarMismatch { found: scalar.into(), expected: T::NAME });
        }
        let lib: Self = serde_json::from_value(v).map_err(|e| LibraryError::Corrupt(e.to_string()))?;
        for u in &lib.units {
            u.check().map_err(|e| LibraryError::Corrupt(e.to_string()))?;
        }
        Ok(lib)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::PartitionUnit;
    use crate::milp::{Sense, VarKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two 2x2 blocks, one master row over all block columns, one border
    /// column touched by the first row of each block.
    fn bbd() -> (MilpInstance<f64>, BlockPartition) {
        let mut inst = MilpInstance::new("toy");
        for j in 0..4 {
            inst.add_binary(format!("x{j}"), -(j as f64) - 1.0);
        }
        inst.kinds[3] = VarKind::Integer;
        inst.upper[3] = f64::INFINITY;
        inst.add_col("z", 0.5, VarKind::Integer, 0.0, f64::INFINITY);
        inst.add_row("a0", Sense::Le, 1.0, &[(0, 2.0), (1, 3.0), (4, 1.0)]);
        inst.add_row("a1", Sense::Le, 1.0, &[(0, 1.0), (1, 1.0)]);
        inst.add_row("m", Sense::Le, 3.0, &[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0), (4, 7.0)]);
        inst.add_row("b0", Sense::Ge, 0.0, &[(2, 4.0), (3, -1.0), (4, 1.0)]);
        inst.add_row("b1", Sense::Eq, 1.0, &[(2, 1.0), (3, 1.0)]);
        let part = BlockPartition {
            units: vec![
                PartitionUnit { rows: vec![1], doubly_rows: vec![0], cols: vec![0, 1] },
                PartitionUnit { rows: vec![4], doubly_rows: vec![3], cols: vec![2, 3] },
            ],
            master_rows: vec![2],
            border_cols: vec![4],
            params: None,
        };
        (inst, part)
    }

    #[test]
    fn extraction_splits_strips() {
        let (inst, part) = bbd();
        let units = extract_block_units(&inst, &part).unwrap();
        assert_eq!(units.len(), 2);
        let u = &units[1];
        assert_eq!(u.width(), 2);
        assert_eq!(u.m1(), 1);
        assert_eq!(u.border_arity(), 1);
        assert_eq!(u.entries.len(), 4);
        assert_eq!(u.mcons_strip.len(), 2);
        assert_eq!(u.border_strip, vec![crate::milp::Triplet { row: 0, col: 0, value: 1.0 }]);
        assert!(u.rows[0].doubly && !u.rows[1].doubly);
        assert_eq!(u.provenance.rows, vec![3, 4]);
    }

    #[test]
    fn reassembly_is_lossless() {
        let (inst, part) = bbd();
        let units = extract_block_units(&inst, &part).unwrap();
        let frame = extract_frame(&inst, &part).unwrap();
        assert_eq!(frame.coupling.len(), 1);
        let back = reassemble(&frame, &units).unwrap();
        assert!(back.structurally_eq(&inst));
    }

    #[test]
    fn reassembly_rejects_missing_unit() {
        let (inst, part) = bbd();
        let units = extract_block_units(&inst, &part).unwrap();
        let frame = extract_frame(&inst, &part).unwrap();
        assert!(matches!(reassemble(&frame, &units[..1]), Err(LibraryError::Mismatch(_))));
    }

    #[test]
    fn json_round_trip_with_infinite_bounds() {
        let (inst, part) = bbd();
        let lib = build_library(&[(inst, part)]).unwrap();
        let text = lib.to_json();
        assert!(text.contains("\"inf\""));
        let back = StructureLibrary::<f64>::load(text.as_bytes()).unwrap();
        assert_eq!(back, lib);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn gzip_accepted_and_truncation_rejected() {
        let (inst, part) = bbd();
        let lib = build_library(&[(inst, part)]).unwrap();
        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        lib.save(&mut gz).unwrap();
        let bytes = gz.finish().unwrap();
        assert_eq!(StructureLibrary::<f64>::load(bytes.as_slice()).unwrap(), lib);
        let text = lib.to_json();
        let cut = &text.as_bytes()[..text.len() / 2];
        assert!(matches!(StructureLibrary::<f64>::load(cut), Err(LibraryError::Corrupt(_))));
        assert!(matches!(
            StructureLibrary::<f64>::load(&bytes[..bytes.len() / 2]),
            Err(LibraryError::Corrupt(_))
        ));
    }

    #[test]
    fn version_and_scalar_checked() {
        let (inst, part) = bbd();
        let lib = build_library(&[(inst, part)]).unwrap();
        let text = lib.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            StructureLibrary::<f64>::load(text.as_bytes()),
            Err(LibraryError::VersionMismatch { found: 9, .. })
        ));
        assert!(matches!(
            StructureLibrary::<f32>::load(lib.to_json().as_bytes()),
            Err(LibraryError::ScalarMismatch { .. })
        ));
    }

    #[test]
    fn sampling_respects_filter() {
        let (inst, part) = bbd();
        let mut other = inst.clone();
        other.name = "other".into();
        let lib = build_library(&[(inst, part.clone()), (other, part)]).unwrap();
        assert_eq!(lib.len(), 4);
        assert_eq!(lib.by_source()["toy"], vec![0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = UnitFilter { exclude_source: Some("toy"), ..Default::default() };
        for _ in 0..20 {
            assert_eq!(lib.sample_unit(&mut rng, &f).unwrap().provenance.source, "other");
        }
        let f = UnitFilter { max_border_arity: Some(0), ..Default::default() };
        assert!(matches!(lib.sample_unit(&mut rng, &f), Err(LibraryError::NoEligibleUnit)));
        assert!(matches!(build_library::<f64>(&[]), Err(LibraryError::EmptyCorpus)));
    }
}

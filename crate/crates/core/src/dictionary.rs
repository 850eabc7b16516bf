//! Overcomplete exemplar dictionaries.
//!
//! A dictionary column is a flattened `K×R` fragment of clean-speech
//! spectrogram, cut at a random offset from a random corpus utterance.
//! Columns keep the corpus scale: reconstruction targets absolute log-power
//! values, so the usual unit-norm atom convention would break it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrogram::Spectrogram;
use crate::spim;

/// Where an atom was cut from: corpus utterance index and frame offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomProvenance {
    pub utterance: usize,
    pub offset: usize,
}

/// An `L × N` matrix of exemplar fragments, `L = bands · fragment_frames`.
///
/// Atoms are stored column-major so each atom is contiguous in memory.
/// Provenance is recorded per atom when the dictionary is built from a
/// corpus; dictionaries assembled from raw atoms may leave it empty.
#[derive(Debug, Clone)]
pub struct Dictionary {
    atoms: Array2<f64>,
    bands: usize,
    fragment_frames: usize,
    seed: u64,
    provenance: Vec<AtomProvenance>,
}

impl Dictionary {
    pub fn from_atoms(
        bands: usize,
        fragment_frames: usize,
        atoms: Array2<f64>,
        seed: u64,
        provenance: Vec<AtomProvenance>,
    ) -> Result<Self> {
        let (rows, cols) = atoms.dim();
        if bands == 0 || fragment_frames == 0 {
            return Err(Error::DictionaryMismatch(
                "bands and fragment_frames must be positive".into(),
            ));
        }
        if rows != bands * fragment_frames {
            return Err(Error::DictionaryMismatch(format!(
                "atom rows {rows} != bands {bands} x fragment_frames {fragment_frames}"
            )));
        }
        if cols == 0 {
            return Err(Error::DictionaryMismatch("no atoms".into()));
        }
        if !atoms.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dictionary atoms"));
        }
        if !provenance.is_empty() && provenance.len() != cols {
            return Err(Error::DictionaryMismatch(format!(
                "provenance length {} != atom count {cols}",
                provenance.len()
            )));
        }
        // keep columns contiguous for the solver
        let atoms = to_column_major(&atoms);
        Ok(Self {
            atoms,
            bands,
            fragment_frames,
            seed,
            provenance,
        })
    }

    pub fn atoms(&self) -> &Array2<f64> {
        &self.atoms
    }

    /// K, the band count of the fragments.
    pub fn bands(&self) -> usize {
        self.bands
    }

    /// R, the fragment length in frames.
    pub fn fragment_frames(&self) -> usize {
        self.fragment_frames
    }

    /// L = K·R, rows per atom.
    pub fn atom_rows(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> &[AtomProvenance] {
        &self.provenance
    }

    /// Write the atom matrix as SPIM plus a JSON manifest sidecar
    /// (`<stem>.manifest.json`).
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        spim::write_matrix_file(&path, &self.atoms)?;
        let manifest = Manifest {
            seed: self.seed,
            bands: self.bands,
            fragment_frames: self.fragment_frames,
            atom_count: self.atom_count(),
            provenance: self.provenance.clone(),
        };
        let mut w = BufWriter::new(File::create(manifest_path(path.as_ref()))?);
        serde_json::to_writer_pretty(&mut w, &manifest)
            .map_err(|e| Error::MalformedManifest(e.to_string()))?;
        w.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let atoms = spim::read_matrix_file(&path)?;
        let reader = BufReader::new(File::open(manifest_path(path.as_ref()))?);
        let manifest: Manifest = serde_json::from_reader(reader)
            .map_err(|e| Error::MalformedManifest(e.to_string()))?;
        if manifest.atom_count != atoms.ncols() {
            return Err(Error::MalformedManifest(format!(
                "manifest atom count {} != matrix columns {}",
                manifest.atom_count,
                atoms.ncols()
            )));
        }
        Self::from_atoms(
            manifest.bands,
            manifest.fragment_frames,
            atoms,
            manifest.seed,
            manifest.provenance,
        )
    }
}

fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    bands: usize,
    fragment_frames: usize,
    atom_count: usize,
    provenance: Vec<AtomProvenance>,
}

fn to_column_major(m: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((rows, cols).f());
    out.assign(m);
    out
}

/// Flatten a `K×R` fragment starting at `offset_frame` into a length-`K·R`
/// vector, frames concatenated (element `t·K + k` is cell `(k, offset+t)`).
pub fn flatten_fragment(
    spec: &Spectrogram,
    offset_frame: usize,
    fragment_frames: usize,
) -> Result<Vec<f64>> {
    if offset_frame + fragment_frames > spec.frames() {
        return Err(Error::FragmentOutOfRange {
            offset: offset_frame,
            fragment_frames,
            total_frames: spec.frames(),
        });
    }
    let bands = spec.bands();
    let mut flat = vec![0.0; bands * fragment_frames];
    for t in 0..fragment_frames {
        for k in 0..bands {
            flat[t * bands + k] = spec.values()[(k, offset_frame + t)];
        }
    }
    Ok(flat)
}

/// Inverse of [`flatten_fragment`]: reshape a flat atom back to `K×R`.
pub fn unflatten_fragment(flat: &[f64], bands: usize) -> Result<Array2<f64>> {
    if bands == 0 || flat.len() % bands != 0 {
        return Err(Error::InvalidConfig(format!(
            "flat length {} not divisible by bands {bands}",
            flat.len()
        )));
    }
    let frames = flat.len() / bands;
    Ok(Array2::from_shape_fn((bands, frames), |(k, t)| {
        flat[t * bands + k]
    }))
}

/// Build a dictionary of `n_atoms` fragments of `fragment_frames` frames,
/// sampled with replacement from uniformly random eligible utterances at
/// uniformly random valid offsets. Deterministic given the seed.
pub fn build_dictionary(
    corpus: &[Spectrogram],
    n_atoms: usize,
    fragment_frames: usize,
    seed: u64,
) -> Result<Dictionary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if n_atoms == 0 {
        return Err(Error::InvalidConfig("n_atoms must be at least 1".into()));
    }
    if fragment_frames == 0 {
        return Err(Error::InvalidConfig(
            "fragment_frames must be at least 1".into(),
        ));
    }
    let bands = corpus[0].bands();
    for (i, spec) in corpus.iter().enumerate() {
        if spec.bands() != bands {
            return Err(Error::DictionaryMismatch(format!(
                "utterance {i} has {} bands, expected {bands}",
                spec.bands()
            )));
        }
    }
    let eligible: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus[i].frames() >= fragment_frames)
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoUtteranceLongEnough {
            needed: fragment_frames,
        });
    }

    let rows = bands * fragment_frames;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Array2::zeros((rows, n_atoms).f());
    let mut provenance = Vec::with_capacity(n_atoms);
    for n in 0..n_atoms {
        let utterance = eligible[rng.random_range(0..eligible.len())];
        let max_offset = corpus[utterance].frames() - fragment_frames;
        let offset = rng.random_range(0..=max_offset);
        let flat = flatten_fragment(&corpus[utterance], offset, fragment_frames)?;
        for (r, v) in flat.into_iter().enumerate() {
            atoms[(r, n)] = v;
        }
        provenance.push(AtomProvenance { utterance, offset });
    }
    Dictionary::from_atoms(bands, fragment_frames, atoms, seed, provenance)
}

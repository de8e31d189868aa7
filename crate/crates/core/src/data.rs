//! Binary-labelled 28×28 grayscale image datasets in the `QBMD1` format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "QBMD1" | n_train: u32 | n_val: u32 | n_test: u32 | items...
//! item = 784 pixel bytes (row-major) | 1 label byte (0 or 1)
//! ```
//!
//! Items are stored train first, then validation, then test.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EncodedPoint;
use crate::seed;

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;
const MAGIC: &[u8; 5] = b"QBMD1";
const HEADER_LEN: usize = 5 + 12;
const ITEM_LEN: usize = PIXELS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub pixels: Vec<u8>,
    pub label: u8,
    pub split: Split,
}

/// Images with labels, ordered by split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    items: Vec<Item>,
}

impl Dataset {
    /// Builds a dataset; items are reordered (stably) by split.
    pub fn new(mut items: Vec<Item>) -> Result<Self> {
        for it in &items {
            if it.pixels.len() != PIXELS {
                return Err(Error::Dimension {
                    what: "image pixels",
                    expected: PIXELS,
                    actual: it.pixels.len(),
                });
            }
            if it.label > 1 {
                return Err(Error::Format(format!("label {} is not binary", it.label)));
            }
        }
        items.sort_by_key(|it| it.split);
        Ok(Dataset { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |it| it.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    /// Fraction of label-1 items in a split (`None` when empty).
    pub fn prevalence(&self, split: Split) -> Option<f64> {
        let n = self.count(split);
        (n > 0).then(|| self.split(split).filter(|it| it.label == 1).count() as f64 / n as f64)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("truncated QBMD1 header".into()));
        }
        if &bytes[..5] != MAGIC {
            return Err(Error::Format("bad QBMD1 magic".into()));
        }
        let mut counts = [0usize; 3];
        for (i, c) in counts.iter_mut().enumerate() {
            let off = 5 + 4 * i;
            *c = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
        }
        let total: usize = counts.iter().sum();
        let expected = HEADER_LEN + ITEM_LEN * total;
        if bytes.len() < expected {
            return Err(Error::Format(format!(
                "truncated QBMD1 file: {} bytes, header promises {expected}",
                bytes.len()
            )));
        }
        if bytes.len() > expected {
            return Err(Error::Format(format!(
                "QBMD1 file has {} trailing bytes",
                bytes.len() - expected
            )));
        }
        let mut items = Vec::with_capacity(total);
        let mut chunks = bytes[HEADER_LEN..].chunks_exact(ITEM_LEN);
        for (split, &n) in Split::ALL.iter().zip(&counts) {
            for _ in 0..n {
                let chunk = chunks.next().expect("length checked");
                let label = chunk[PIXELS];
                if label > 1 {
                    return Err(Error::Format(format!("label byte {label} is not 0 or 1")));
                }
                items.push(Item {
                    pixels: chunk[..PIXELS].to_vec(),
                    label,
                    split: *split,
                });
            }
        }
        Ok(Dataset { items })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(HEADER_LEN + ITEM_LEN * self.len());
        out.extend_from_slice(MAGIC);
        for split in Split::ALL {
            let n = u32::try_from(self.count(split)).map_err(|_| Error::Format("split too large for QBMD1".into()))?;
            out.extend_from_slice(&n.to_le_bytes());
        }
        for it in &self.items {
            out.extend_from_slice(&it.pixels);
            out.push(it.label);
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    /// Seeded shuffle of a split into batches of `size` (last one partial).
    pub fn batches(&self, split: Split, size: usize, seed: u64) -> Result<Vec<Vec<&Item>>> {
        let items: Vec<&Item> = self.split(split).collect();
        Ok(batch_indices(items.len(), size, seed)?
            .into_iter()
            .map(|b| b.into_iter().map(|i| items[i]).collect())
            .collect())
    }
}

/// Pixel intensities scaled to [0, 1], row-major.
pub fn encode_pixels(pixels: &[u8]) -> Vec<f64> {
    pixels.iter().map(|&p| p as f64 / 255.0).collect()
}

pub fn encode_item(item: &Item) -> EncodedPoint {
    EncodedPoint {
        inputs: encode_pixels(&item.pixels),
        labels: vec![item.label],
    }
}

/// Encodes every item of a split.
pub fn encode_split(ds: &Dataset, split: Split) -> Vec<EncodedPoint> {
    ds.split(split).map(encode_item).collect()
}

pub fn encode(ds: &Dataset) -> Vec<EncodedPoint> {
    ds.items().iter().map(encode_item).collect()
}

/// Shuffled index batches over `0..n`.
pub fn batch_indices(n: usize, size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    Ok(order.chunks(size).map(|c| c.to_vec()).collect())
}

/// Seeded stand-in for a binary image dataset: positives carry a bright
/// blob near the centre, negatives only background texture. About 73% of
/// each split is positive. `counts` are the train/val/test sizes.
pub fn synthetic(counts: [usize; 3], seed_value: u64) -> Result<Dataset> {
    let mut rng = seed::rng(seed_value);
    let mut items = Vec::with_capacity(counts.iter().sum());
    for (split, &n) in Split::ALL.iter().zip(&counts) {
        for _ in 0..n {
            let label = (rng.gen::<f64>() < 0.73) as u8;
            let (cx, cy) = (rng.gen_range(11.0..17.0), rng.gen_range(11.0..17.0));
            let radius: f64 = rng.gen_range(3.0..6.0);
            let pixels = (0..PIXELS)
                .map(|q| {
                    let (x, y) = ((q % SIDE) as f64, (q / SIDE) as f64);
                    let mut v: f64 = rng.gen_range(0.0..90.0);
                    if label == 1 && (x - cx).hypot(y - cy) < radius {
                        v += rng.gen_range(60.0..160.0);
                    }
                    v.min(255.0) as u8
                })
                .collect();
            items.push(Item {
                pixels,
                label,
                split: *split,
            });
        }
    }
    Dataset::new(items)
}

/// Bars-versus-stripes patterns on a `side × side` grid: every non-empty,
/// non-full choice of filled rows (stripes, label 1) or filled columns
/// (bars, label 0).
pub fn bars_and_stripes(side: usize) -> Result<Vec<EncodedPoint>> {
    if !(2..=16).contains(&side) {
        return Err(Error::InvalidArgument("side must be between 2 and 16".into()));
    }
    let mut out = Vec::new();
    for label in [1u8, 0] {
        for mask in 1..(1u32 << side) - 1 {
            let inputs = (0..side * side)
                .map(|q| {
                    let line = if label == 1 { q / side } else { q % side };
                    ((mask >> line) & 1) as f64
                })
                .collect();
            out.push(EncodedPoint {
                inputs,
                labels: vec![label],
            });
        }
    }
    Ok(out)
}

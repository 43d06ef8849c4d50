use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ThermoError;
use crate::sft::{higher_block, BlockIndex, Sft, Symbol, Word};

/// A locally constant potential in edge form: `f(x) = table(x_0, x_1)` on
/// the presentation it is bound to. Values off the allowed transitions are
/// never read.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    range: usize,
    size: usize,
    values: Vec<f64>,
}

impl Potential {
    /// `f(a, b)` from a closure over presentation symbols.
    pub fn from_fn(sft: &Sft, f: impl Fn(Symbol, Symbol) -> f64) -> Self {
        let size = sft.size();
        let mut values = vec![0.0; size * size];
        for a in 0..size as Symbol {
            for b in sft.successors(a) {
                values[a as usize * size + b as usize] = f(a, b);
            }
        }
        Potential {
            range: 2,
            size,
            values,
        }
    }

    pub fn zero(sft: &Sft) -> Self {
        Self::constant(sft, 0.0)
    }

    pub fn constant(sft: &Sft, c: f64) -> Self {
        Self::from_fn(sft, |_, _| c)
    }

    /// Row-major `size x size` table.
    pub fn from_table(sft: &Sft, values: Vec<f64>) -> Result<Self, ThermoError> {
        let size = sft.size();
        if values.len() != size * size {
            return Err(ThermoError::ShapeMismatch {
                expected: size * size,
                got: values.len(),
            });
        }
        Ok(Potential {
            range: 2,
            size,
            values,
        })
    }

    /// Range of the original potential this table was reduced from.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn value(&self, a: Symbol, b: Symbol) -> f64 {
        self.values[a as usize * self.size + b as usize]
    }

    /// Largest value over the allowed successors of `a`.
    pub fn max_out(&self, sft: &Sft, a: Symbol) -> f64 {
        sft.successors(a)
            .map(|b| self.value(a, b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_out(&self, sft: &Sft, a: Symbol) -> f64 {
        sft.successors(a)
            .map(|b| self.value(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sup norm over allowed transitions.
    pub fn sup_norm(&self, sft: &Sft) -> f64 {
        (0..sft.size() as Symbol)
            .flat_map(|a| sft.successors(a).map(move |b| (a, b)))
            .map(|(a, b)| self.value(a, b).abs())
            .fold(0.0, f64::max)
    }

    /// Transports the potential to a shift on `n`-blocks of its presentation.
    ///
    /// `origin[p]` is the block index of symbol `p` of `target`. The edge
    /// leaving block `u` carries `f(u_0, u_1)`, where `u_1` is read off the
    /// next block when `n = 1`. Birkhoff sums along a block path then agree
    /// with those of the underlying point.
    pub fn lift(&self, index: &BlockIndex, origin: &[usize], target: &Sft) -> Potential {
        let n = index.block_len();
        Potential {
            range: self.range,
            ..Potential::from_fn(target, |p, q| {
                let u = index.word(origin[p as usize]);
                let second = if n >= 2 {
                    u[1]
                } else {
                    index.last_symbol(origin[q as usize])
                };
                self.value(u[0], second)
            })
        }
    }
}

/// A locally constant potential as written in a potential file: values of
/// `f` on words of length `range` over the original alphabet. Words with no
/// entry take `default`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub range: usize,
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec {
            range: 1,
            default: 0.0,
            values: BTreeMap::new(),
        }
    }

    /// Binds the table to `sft`, recoding to higher blocks when the range
    /// exceeds what one transition of the presentation can see. Returns the
    /// presentation the potential lives on together with its edge table.
    pub fn bind(&self, sft: &Sft) -> Result<(Sft, Potential), ThermoError> {
        if self.range == 0 {
            return Err(ThermoError::BadRange);
        }
        let mut table: BTreeMap<Word, f64> = BTreeMap::new();
        for (k, &v) in &self.values {
            let w: Word = k.parse()?;
            if w.len() != self.range {
                return Err(ThermoError::BadPotentialWord(k.clone()));
            }
            if !v.is_finite() {
                return Err(ThermoError::NonFinite(k.clone()));
            }
            table.insert(w, v);
        }
        if !self.default.is_finite() {
            return Err(ThermoError::NonFinite("default".into()));
        }
        // One edge of the presentation covers block_len + 1 original symbols.
        let covered = sft.block_len() + 1;
        let host = if self.range > covered {
            higher_block(sft, self.range - covered + 1)
        } else {
            sft.clone()
        };
        let pot = Potential::from_fn(&host, |a, b| {
            let word = host.decode(&[a, b]);
            table
                .get(&Word::from(&word[..self.range]))
                .copied()
                .unwrap_or(self.default)
        });
        Ok((
            host,
            Potential {
                range: self.range,
                ..pot
            },
        ))
    }
}

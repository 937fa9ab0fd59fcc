//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "KNLM" | version u32 | order u32 | unknown rule u8
//! vocab:     count u32, then (byte length u32, UTF-8 bytes) per entry
//! discounts: order x (d1 f64, d2 f64, d3 f64)
//! per order n = 1..=order:
//!   probs:    count u64, then (n x id u32, log10 prob f64), sorted by ids
//!   backoffs: count u64, then ((n-1) x id u32, log10 weight f64), sorted by ids
//! ```

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Discounts, KnLanguageModel, LmError, UnknownRule};

pub const MAGIC: &[u8; 4] = b"KNLM";
pub const FORMAT_VERSION: u32 = 1;

fn write_table<W: Write>(w: &mut W, table: &HashMap<Vec<u32>, f64>) -> std::io::Result<()> {
    let mut entries: Vec<(&Vec<u32>, &f64)> = table.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    w.write_all(&(entries.len() as u64).to_le_bytes())?;
    for (ids, value) in entries {
        for id in ids {
            w.write_all(&id.to_le_bytes())?;
        }
        w.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], LmError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                LmError::Corrupt("unexpected end of file".into())
            } else {
                LmError::Io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, LmError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, LmError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, LmError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn table(&mut self, key_len: usize, vocab_len: u32) -> Result<HashMap<Vec<u32>, f64>, LmError> {
        let count = self.u64()?;
        let mut table = HashMap::new();
        for _ in 0..count {
            let mut key = Vec::with_capacity(key_len);
            for _ in 0..key_len {
                let id = self.u32()?;
                if id >= vocab_len {
                    return Err(LmError::Corrupt(format!("token id {id} out of range")));
                }
                key.push(id);
            }
            table.insert(key, self.f64()?);
        }
        Ok(table)
    }
}

impl KnLanguageModel {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), LmError> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.order as u32).to_le_bytes())?;
        w.write_all(&[self.unknown.code()])?;
        w.write_all(&(self.vocab.len() as u32).to_le_bytes())?;
        for token in &self.vocab {
            w.write_all(&(token.len() as u32).to_le_bytes())?;
            w.write_all(token.as_bytes())?;
        }
        for d in &self.discounts {
            for v in [d.d1, d.d2, d.d3] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for n in 0..self.order {
            write_table(&mut w, &self.probs[n])?;
            write_table(&mut w, &self.backoffs[n])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<KnLanguageModel, LmError> {
        let mut r = Reader { inner: r };
        if &r.bytes::<4>()? != MAGIC {
            return Err(LmError::BadMagic);
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(LmError::BadVersion(version));
        }
        let order = r.u32()? as usize;
        if order == 0 {
            return Err(LmError::Corrupt("order 0".into()));
        }
        let [code] = r.bytes::<1>()?;
        let unknown = UnknownRule::from_code(code)
            .ok_or_else(|| LmError::Corrupt(format!("unknown rule code {code}")))?;
        let vocab_len = r.u32()?;
        let mut vocab = Vec::with_capacity(vocab_len as usize);
        for _ in 0..vocab_len {
            let len = r.u32()? as usize;
            let mut buf = vec![0u8; len];
            r.inner.read_exact(&mut buf)?;
            vocab.push(
                String::from_utf8(buf)
                    .map_err(|_| LmError::Corrupt("vocab entry is not UTF-8".into()))?,
            );
        }
        if vocab.len() < 3 || vocab[..3] != [super::BOS, super::EOS, super::UNK] {
            return Err(LmError::Corrupt("missing boundary symbols in vocab".into()));
        }
        let mut discounts = Vec::with_capacity(order);
        for _ in 0..order {
            discounts.push(Discounts {
                d1: r.f64()?,
                d2: r.f64()?,
                d3: r.f64()?,
            });
        }
        let mut probs = Vec::with_capacity(order);
        let mut backoffs = Vec::with_capacity(order);
        for n in 1..=order {
            probs.push(r.table(n, vocab_len)?);
            backoffs.push(r.table(n - 1, vocab_len)?);
        }
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let fallback_orders = discounts
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Discounts::fallback())
            .map(|(i, _)| i + 1)
            .collect();
        Ok(KnLanguageModel {
            order,
            unknown,
            vocab,
            index,
            probs,
            backoffs,
            discounts,
            fallback_orders,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LmError> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<KnLanguageModel, LmError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

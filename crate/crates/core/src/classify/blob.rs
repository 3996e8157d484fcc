use std::fs;
use std::path::Path;

use super::{ClassifierKind, LogregParams, Model, RbfMachine, TrainedClassifier};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"MDISTCLF";
pub const MODEL_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len());
        v.iter().for_each(|x| self.f64(*x));
    }

    fn rows(&mut self, rows: &[Vec<f64>]) {
        self.u64(rows.len());
        rows.iter().for_each(|r| self.f64s(r));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated model file".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format("length overflow".into()))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        if n > self.bytes.len() {
            return Err(Error::Format("implausible length in model file".into()));
        }
        Ok(n)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn rows(&mut self) -> Result<Vec<Vec<f64>>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64s()).collect()
    }
}

/// Layout: magic, u32 version, u8 kind, u8 model tag, u64 class count,
/// u64 dim, then the model body (little-endian throughout).
pub fn encode_model(model: &TrainedClassifier) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MODEL_MAGIC);
    w.0.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    w.0.push(match model.kind {
        ClassifierKind::Knn => 0,
        ClassifierKind::Logreg => 1,
        ClassifierKind::SvmRbf => 2,
    });
    match &model.model {
        Model::Constant(c) => {
            w.0.push(0);
            w.u64(model.class_count);
            w.u64(model.dim);
            w.u64(*c);
        }
        Model::Knn { k, points, labels } => {
            w.0.push(1);
            w.u64(model.class_count);
            w.u64(model.dim);
            w.u64(*k);
            w.rows(points);
            w.u64(labels.len());
            labels.iter().for_each(|l| w.u64(*l));
        }
        Model::Logreg { mean, scale, params } => {
            w.0.push(2);
            w.u64(model.class_count);
            w.u64(model.dim);
            w.f64s(mean);
            w.f64s(scale);
            w.u64(params.classes);
            w.u64(params.dim);
            w.f64s(&params.values);
        }
        Model::Svm { gamma, c, machines } => {
            w.0.push(3);
            w.u64(model.class_count);
            w.u64(model.dim);
            w.f64(*gamma);
            w.f64(*c);
            w.u64(machines.len());
            for m in machines {
                w.rows(&m.support);
                w.f64s(&m.coef);
                w.f64(m.rho);
            }
        }
    }
    w.0
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedClassifier> {
    if bytes.len() < 14 || &bytes[..8] != MODEL_MAGIC {
        return Err(Error::Format("not a classifier model file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "model version {version} is not supported (expected {MODEL_VERSION})"
        )));
    }
    let kind = match bytes[12] {
        0 => ClassifierKind::Knn,
        1 => ClassifierKind::Logreg,
        2 => ClassifierKind::SvmRbf,
        t => return Err(Error::Format(format!("unknown classifier tag {t}"))),
    };
    let tag = bytes[13];
    let mut r = Reader { bytes, at: 14 };
    let class_count = r.u64()?;
    let dim = r.u64()?;
    let model = match tag {
        0 => Model::Constant(r.u64()?),
        1 => {
            let k = r.u64()?;
            let points = r.rows()?;
            let n = r.len()?;
            let labels = (0..n).map(|_| r.u64()).collect::<Result<_>>()?;
            Model::Knn { k, points, labels }
        }
        2 => {
            let mean = r.f64s()?;
            let scale = r.f64s()?;
            let classes = r.u64()?;
            let pdim = r.u64()?;
            let values = r.f64s()?;
            if values.len() != classes * (pdim + 1) {
                return Err(Error::Format("logreg parameter block has the wrong size".into()));
            }
            Model::Logreg {
                mean,
                scale,
                params: LogregParams {
                    classes,
                    dim: pdim,
                    values,
                },
            }
        }
        3 => {
            let gamma = r.f64()?;
            let c = r.f64()?;
            let count = r.len()?;
            let machines = (0..count)
                .map(|_| {
                    Ok(RbfMachine {
                        support: r.rows()?,
                        coef: r.f64s()?,
                        rho: r.f64()?,
                    })
                })
                .collect::<Result<_>>()?;
            Model::Svm { gamma, c, machines }
        }
        t => return Err(Error::Format(format!("unknown model tag {t}"))),
    };
    if r.at != bytes.len() {
        return Err(Error::Format("trailing bytes in model file".into()));
    }
    Ok(TrainedClassifier {
        kind,
        class_count,
        dim,
        model,
    })
}

pub fn write_model(path: impl AsRef<Path>, model: &TrainedClassifier) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<TrainedClassifier> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

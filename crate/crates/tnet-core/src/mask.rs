//! Integer label masks for dense segmentation targets.

use crate::error::{Error, Result};

/// Label value excluded from loss and metric accumulation.
pub const IGNORE_LABEL: u8 = 255;

/// Per-pixel class labels for a batch, shape (n, h, w).
///
/// Valid entries are class ids `< K` plus [`IGNORE_LABEL`]; the consumer's
/// class count decides validity, checked via [`Mask::validate_labels`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(n: usize, h: usize, w: usize, data: Vec<u8>) -> Result<Mask> {
        if n == 0 || h == 0 || w == 0 {
            return Err(Error::Shape(format!("zero-sized mask ({n}, {h}, {w})")));
        }
        if data.len() != n * h * w {
            return Err(Error::Shape(format!(
                "mask data length {} != {}*{}*{}",
                data.len(),
                n,
                h,
                w
            )));
        }
        Ok(Mask { n, h, w, data })
    }

    pub fn filled(n: usize, h: usize, w: usize, label: u8) -> Mask {
        Mask {
            n,
            h,
            w,
            data: vec![label; n * h * w],
        }
    }

    #[inline]
    pub fn index(&self, n: usize, h: usize, w: usize) -> usize {
        (n * self.h + h) * self.w + w
    }

    #[inline]
    pub fn at(&self, n: usize, h: usize, w: usize) -> u8 {
        self.data[self.index(n, h, w)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, h: usize, w: usize, label: u8) {
        let i = self.index(n, h, w);
        self.data[i] = label;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    /// Reject any label >= num_classes other than IGNORE.
    pub fn validate_labels(&self, num_classes: usize) -> Result<()> {
        for (i, &v) in self.data.iter().enumerate() {
            if v != IGNORE_LABEL && (v as usize) >= num_classes {
                return Err(Error::Data(format!(
                    "mask label {v} at flat index {i} exceeds class count {num_classes}"
                )));
            }
        }
        Ok(())
    }

    /// Stack several single-image masks (n must be 1 for each) into a batch.
    pub fn stack(masks: &[&Mask]) -> Result<Mask> {
        let first = masks
            .first()
            .ok_or_else(|| Error::Shape("cannot stack zero masks".into()))?;
        let (h, w) = (first.h, first.w);
        let mut data = Vec::with_capacity(masks.len() * h * w);
        for m in masks {
            if m.n != 1 || m.h != h || m.w != w {
                return Err(Error::Shape(format!(
                    "stack expects (1, {h}, {w}) masks, got ({}, {}, {})",
                    m.n, m.h, m.w
                )));
            }
            data.extend_from_slice(&m.data);
        }
        Mask::new(masks.len(), h, w, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_out_of_range() {
        let m = Mask::new(1, 1, 3, vec![0, 4, 255]).unwrap();
        assert!(m.validate_labels(4).is_err());
        assert!(m.validate_labels(5).is_ok());
    }

    #[test]
    fn ignore_is_always_valid() {
        let m = Mask::filled(1, 2, 2, IGNORE_LABEL);
        assert!(m.validate_labels(2).is_ok());
    }

    #[test]
    fn stack_concatenates() {
        let a = Mask::filled(1, 2, 2, 0);
        let b = Mask::filled(1, 2, 2, 1);
        let s = Mask::stack(&[&a, &b]).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.at(0, 1, 1), 0);
        assert_eq!(s.at(1, 0, 0), 1);
    }
}

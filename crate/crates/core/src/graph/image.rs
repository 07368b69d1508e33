use serde::{Deserialize, Serialize};

use super::{is_permutation, GraphError};
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

pub const WHITE: u8 = 255;
pub const BLACK: u8 = 0;

/// Binary picture of a constraint matrix: 255 where the (permuted) entry is
/// nonzero, 0 elsewhere. Row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcmImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
    pub row_perm: Option<Vec<usize>>,
    pub col_perm: Option<Vec<usize>>,
}

impl CcmImage {
    pub fn blank(height: usize, width: usize) -> Self {
        Self { height, width, pixels: vec![BLACK; height * width], row_perm: None, col_perm: None }
    }

    /// Image with white pixels at the listed positions.
    pub fn from_points(height: usize, width: usize, points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut img = Self::blank(height, width);
        for (i, j) in points {
            img.set(i, j, WHITE);
        }
        img
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[i * self.width + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.pixels[i * self.width + j] = v;
    }

    pub fn is_white(&self, i: usize, j: usize) -> bool {
        self.get(i, j) == WHITE
    }

    pub fn count_white(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == WHITE).count()
    }
}

/// Renders `inst.ccm` with pixel (i, j) showing entry (row_perm[i], col_perm[j]).
/// `None` means identity.
pub fn to_ccm_image<T: Scalar>(
    inst: &MilpInstance<T>,
    row_perm: Option<&[usize]>,
    col_perm: Option<&[usize]>,
) -> Result<CcmImage, GraphError> {
    let (m, n) = (inst.num_rows(), inst.num_cols());
    let inverse = |perm: Option<&[usize]>, len: usize, axis| -> Result<Vec<usize>, GraphError> {
        match perm {
            None => Ok((0..len).collect()),
            Some(p) if is_permutation(p, len) => {
                let mut inv = vec![0; len];
                for (pos, &orig) in p.iter().enumerate() {
                    inv[orig] = pos;
                }
                Ok(inv)
            }
            Some(_) => Err(GraphError::NotBijective { axis, len }),
        }
    };
    let row_pos = inverse(row_perm, m, "row")?;
    let col_pos = inverse(col_perm, n, "column")?;
    let mut img = CcmImage::blank(m, n);
    for e in &inst.ccm.entries {
        if e.value != T::zero() {
            img.set(row_pos[e.row], col_pos[e.col], WHITE);
        }
    }
    img.row_perm = row_perm.map(<[usize]>::to_vec);
    img.col_perm = col_perm.map(<[usize]>::to_vec);
    Ok(img)
}

/// Binary greymap (`P5`, maxval 255).
pub fn write_pgm(img: &CcmImage) -> Result<Vec<u8>, GraphError> {
    if img.height == 0 || img.width == 0 {
        return Err(GraphError::ZeroDimension { height: img.height, width: img.width });
    }
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    Ok(out)
}

/// Which image rows and columns are tinted in the colour rendering.
#[derive(Clone, Debug, Default)]
pub struct Tint {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// RGB colours for `write_ppm`, as (nonzero, zero) pairs per region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Palette {
    pub block: ([u8; 3], [u8; 3]),
    pub row: ([u8; 3], [u8; 3]),
    pub col: ([u8; 3], [u8; 3]),
    pub both: ([u8; 3], [u8; 3]),
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            block: ([255, 255, 255], [0, 0, 0]),
            row: ([255, 64, 64], [64, 0, 0]),
            col: ([64, 160, 255], [0, 24, 64]),
            both: ([255, 220, 64], [64, 48, 0]),
        }
    }
}

/// Binary pixmap (`P6`) with tinted rows (e.g. master constraints) and
/// columns (e.g. border variables).
pub fn write_ppm(img: &CcmImage, tint: &Tint, palette: &Palette) -> Result<Vec<u8>, GraphError> {
    if img.height == 0 || img.width == 0 {
        return Err(GraphError::ZeroDimension { height: img.height, width: img.width });
    }
    let mut row_t = vec![false; img.height];
    let mut col_t = vec![false; img.width];
    for &i in &tint.rows {
        *row_t.get_mut(i).ok_or(GraphError::IndexOutOfRange { what: "row", index: i, len: img.height })? = true;
    }
    for &j in &tint.cols {
        *col_t.get_mut(j).ok_or(GraphError::IndexOutOfRange { what: "column", index: j, len: img.width })? = true;
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for i in 0..img.height {
        for j in 0..img.width {
            let (on, off) = match (row_t[i], col_t[j]) {
                (false, false) => palette.block,
                (true, false) => palette.row,
                (false, true) => palette.col,
                (true, true) => palette.both,
            };
            out.extend_from_slice(if img.is_white(i, j) { &on } else { &off });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    fn diag3() -> MilpInstance<f64> {
        let mut inst = MilpInstance::new("d");
        for j in 0..3 {
            inst.add_binary(format!("x{j}"), 0.0);
        }
        for i in 0..3 {
            inst.add_row(format!("r{i}"), Sense::Le, 1.0, &[(i, 1.0)]);
        }
        inst
    }

    #[test]
    fn identity_diagonal() {
        let img = to_ccm_image(&diag3(), None, None).unwrap();
        assert_eq!(img.count_white(), 3);
        for i in 0..3 {
            assert!(img.is_white(i, i));
        }
    }

    #[test]
    fn reversal_gives_anti_diagonal() {
        let rev = [2, 1, 0];
        let img = to_ccm_image(&diag3(), Some(&rev), None).unwrap();
        for i in 0..3 {
            assert!(img.is_white(i, 2 - i));
        }
        assert_eq!(img.count_white(), 3);
    }

    #[test]
    fn non_bijection_rejected() {
        let err = to_ccm_image(&diag3(), None, Some(&[0, 0, 1])).unwrap_err();
        assert_eq!(err, GraphError::NotBijective { axis: "column", len: 3 });
    }

    #[test]
    fn pgm_black_2x2() {
        let bytes = write_pgm(&CcmImage::blank(2, 2)).unwrap();
        let mut want = b"P5\n2 2\n255\n".to_vec();
        want.extend([0u8; 4]);
        assert_eq!(bytes, want);
        assert!(write_pgm(&CcmImage::blank(0, 3)).is_err());
    }

    #[test]
    fn pgm_header_is_width_then_height() {
        let img = CcmImage::from_points(1, 3, [(0, 1)]);
        assert_eq!(write_pgm(&img).unwrap(), b"P5\n3 1\n255\n\x00\xff\x00".to_vec());
    }

    #[test]
    fn ppm_tints_regions() {
        let img = CcmImage::from_points(2, 2, [(0, 0), (1, 1)]);
        let tint = Tint { rows: vec![1], cols: vec![1] };
        let bytes = write_ppm(&img, &tint, &Palette::default()).unwrap();
        let body = &bytes[b"P6\n2 2\n255\n".len()..];
        assert_eq!(&body[0..3], &[255, 255, 255]);
        assert_eq!(&body[3..6], &[0, 24, 64]);
        assert_eq!(&body[6..9], &[64, 0, 0]);
        assert_eq!(&body[9..12], &[255, 220, 64]);
    }
}

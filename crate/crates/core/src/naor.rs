//! Classical (n, n) visual secret sharing with pixel expansion.
//!
//! Each pixel becomes `m = 2^(n-1)` subpixels per share. The white base
//! matrix has every even-weight column vector of length `n` as a column,
//! the black base every odd-weight one; a pixel is shared by a uniformly
//! random column permutation of the matching base. Stacking (OR-ing) all
//! `n` rows gives weight `m - 1` for white (the all-zero column survives)
//! and `m` for black, so the threshold is `d = m` with relative difference
//! `1/m`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};
use crate::seed::derived_rng;

/// Largest supported `n`; `m = 2^(n-1)` subpixels per pixel.
pub const MAX_BASELINE_N: usize = 12;

/// Largest `m` for which [`MatrixSets::members`] lists all `m!` matrices.
pub const MAX_ENUMERATED_COLUMNS: usize = 8;

/// `rows × cols` matrix of subpixels, 1 = black.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanShareMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl BooleanShareMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|&e| e > 1) {
            return Err(Error::Argument("matrix entries must be 0 or 1".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Matrix whose column `k` holds the bits of `columns[k]`, row 1 being
    /// the most significant of the `rows` bits.
    fn from_column_words(rows: usize, columns: &[u64]) -> Self {
        let cols = columns.len();
        let mut entries = vec![0u8; rows * cols];
        for (k, word) in columns.iter().enumerate() {
            for i in 0..rows {
                entries[i * cols + k] = ((word >> (rows - 1 - i)) & 1) as u8;
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` (one-based), i.e. the subpixels handed to participant `i`.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[(i - 1) * self.cols..i * self.cols]
    }

    pub fn get(&self, i: usize, k: usize) -> u8 {
        self.entries[(i - 1) * self.cols + (k - 1)]
    }

    /// Column `k` (zero-based) as a word, row 1 most significant.
    fn column_word(&self, k: usize) -> u64 {
        (0..self.rows).fold(0u64, |acc, i| (acc << 1) | self.entries[i * self.cols + k] as u64)
    }

    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let words: Vec<u64> = perm.iter().map(|&k| self.column_word(k)).collect();
        Self::from_column_words(self.rows, &words)
    }

    /// Submatrix of the given rows (one-based), in the given order.
    pub fn restrict(&self, rows: &[usize]) -> Self {
        let entries = rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self {
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    /// Multiset of columns, keyed by column word.
    pub fn column_multiset(&self) -> BTreeMap<u64, usize> {
        let mut counts = BTreeMap::new();
        for k in 0..self.cols {
            *counts.entry(self.column_word(k)).or_insert(0) += 1;
        }
        counts
    }
}

/// The collections `C0` (white) and `C1` (black), each represented by its
/// base matrix; members are all column permutations of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSets {
    n: usize,
    white: BooleanShareMatrix,
    black: BooleanShareMatrix,
    threshold: usize,
    relative_difference: Ratio<u64>,
}

impl MatrixSets {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Subpixels per pixel.
    pub fn m(&self) -> usize {
        self.white.cols
    }

    /// Stacked weight at or above which a pixel reads black (`d`).
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Normalized weight gap between black and white stacks.
    pub fn relative_difference(&self) -> Ratio<u64> {
        self.relative_difference
    }

    pub fn base(&self, bit: u8) -> &BooleanShareMatrix {
        if bit == 0 {
            &self.white
        } else {
            &self.black
        }
    }

    /// Every member of `C_bit` (one per column permutation, so repeated
    /// matrices appear with their multiplicity). Only for `m <= 8`.
    pub fn members(&self, bit: u8) -> Result<Vec<BooleanShareMatrix>> {
        let m = self.m();
        if m > MAX_ENUMERATED_COLUMNS {
            return Err(Error::Size(format!("refusing to enumerate {m}! permutations")));
        }
        let base = self.base(bit);
        let mut perm: Vec<usize> = (0..m).collect();
        let mut out = Vec::new();
        permutations(&mut perm, 0, &mut |p| out.push(base.permute_columns(p)));
        Ok(out)
    }
}

fn permutations(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Parity-column construction of the (n, n) sets.
pub fn build_nn_matrix_sets(n: usize) -> Result<MatrixSets> {
    if n < 2 {
        return Err(Error::Argument(format!("(n, n) sharing needs n >= 2, got {n}")));
    }
    if n > MAX_BASELINE_N {
        return Err(Error::Size(format!("n = {n} exceeds baseline limit {MAX_BASELINE_N}")));
    }
    let words = |parity: u32| -> Vec<u64> {
        (0..1u64 << n).filter(|w| w.count_ones() % 2 == parity).collect()
    };
    let white = BooleanShareMatrix::from_column_words(n, &words(0));
    let black = BooleanShareMatrix::from_column_words(n, &words(1));
    let m = white.cols as u64;
    Ok(MatrixSets {
        n,
        white,
        black,
        threshold: m as usize,
        relative_difference: Ratio::new(1, m),
    })
}

/// Uniformly random member of `C0` (white) or `C1` (black).
pub fn classical_share_pixel<R: Rng + ?Sized>(
    color: Color,
    sets: &MatrixSets,
    rng: &mut R,
) -> BooleanShareMatrix {
    let mut perm: Vec<usize> = (0..sets.m()).collect();
    perm.shuffle(rng);
    sets.base(color.bit()).permute_columns(&perm)
}

/// OR of the selected rows (one-based) and its Hamming weight.
pub fn stack_and_weight(matrix: &BooleanShareMatrix, rows: &[usize]) -> Result<(Vec<u8>, usize)> {
    if rows.is_empty() {
        return Err(Error::Argument("cannot stack an empty set of rows".into()));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i == 0 || i > matrix.rows) {
        return Err(Error::Argument(format!("row {bad} outside 1..={}", matrix.rows)));
    }
    let mut v = vec![0u8; matrix.cols];
    for &i in rows {
        for (acc, &s) in v.iter_mut().zip(matrix.row(i)) {
            *acc |= s;
        }
    }
    let weight = v.iter().map(|&b| b as usize).sum();
    Ok((v, weight))
}

/// Result of checking both validity conditions on a set pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionCheck {
    /// Full-stack weights observed for `C0` members (min, max).
    pub white_weights: (usize, usize),
    /// Full-stack weights observed for `C1` members (min, max).
    pub black_weights: (usize, usize),
    /// Contrast condition: white max <= d - αm and black min >= d.
    pub contrast_holds: bool,
    /// Proper row subsets whose restricted collections differ.
    pub distinguishable_subsets: Vec<Vec<usize>>,
}

impl ConditionCheck {
    pub fn valid(&self) -> bool {
        self.contrast_holds && self.distinguishable_subsets.is_empty()
    }
}

/// Checks both conditions over every row subset.
///
/// Since each collection is the full orbit of its base under column
/// permutations, the stacked weight of a member equals that of the base,
/// and two restricted collections agree (same matrices, same frequencies)
/// exactly when the restricted bases have the same column multiset.
pub fn check_conditions(sets: &MatrixSets) -> ConditionCheck {
    let n = sets.n;
    let all: Vec<usize> = (1..=n).collect();
    let weight = |bit| stack_and_weight(sets.base(bit), &all).expect("valid rows").1;
    let (w, b) = (weight(0), weight(1));
    let alpha_m = sets.relative_difference * Ratio::from_integer(sets.m() as u64);
    let contrast_holds = Ratio::from_integer(w as u64) <= Ratio::from_integer(sets.threshold as u64) - alpha_m
        && b >= sets.threshold;

    let mut distinguishable_subsets = Vec::new();
    for mask in 1u64..(1 << n) - 1 {
        let rows: Vec<usize> = (1..=n).filter(|i| mask >> (n - i) & 1 == 1).collect();
        if sets.white.restrict(&rows).column_multiset() != sets.black.restrict(&rows).column_multiset() {
            distinguishable_subsets.push(rows);
        }
    }
    ConditionCheck {
        white_weights: (w, w),
        black_weights: (b, b),
        contrast_holds,
        distinguishable_subsets,
    }
}

/// Subpixel block shape `(rows, cols)` of one expanded pixel.
pub fn block_shape(m: usize) -> (usize, usize) {
    let bits = m.trailing_zeros();
    let cols = 1usize << bits.div_ceil(2);
    (m / cols, cols)
}

/// Shares `image`; share `i` is an image `block_rows × block_cols` times
/// larger in which pixel `l`'s block holds row `i` of its matrix, laid out
/// row-major. Pixel `l` uses the stream `(seed, l)`.
pub fn classical_share_image(
    image: &BinaryImage,
    sets: &MatrixSets,
    seed: u64,
) -> Result<Vec<BinaryImage>> {
    let (br, bc) = block_shape(sets.m());
    let (w, h) = (image.width() * bc, image.height() * br);
    let mut shares = vec![BinaryImage::filled(w, h, Color::White)?; sets.n];
    for l in 1..=image.pixel_count() {
        let mut rng = derived_rng(seed, l as u64);
        let matrix = classical_share_pixel(image.pixel(l), sets, &mut rng);
        let (row, col) = image.position(l);
        for (i, share) in shares.iter_mut().enumerate() {
            for (k, &s) in matrix.row(i + 1).iter().enumerate() {
                share.set(row * br + k / bc, col * bc + k % bc, Color::from_bit(s));
            }
        }
    }
    Ok(shares)
}

/// Stacked transparencies and the pixel image read back from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalRecovery {
    /// Subpixel-level OR of all shares (expanded size).
    pub stacked: BinaryImage,
    /// One pixel per block: black iff the block weight reaches `d`.
    pub decoded: BinaryImage,
}

pub fn classical_recover_image(shares: &[BinaryImage], sets: &MatrixSets) -> Result<ClassicalRecovery> {
    let first = shares
        .first()
        .ok_or_else(|| Error::Argument("no shares to stack".into()))?;
    let (w, h) = (first.width(), first.height());
    if shares.iter().any(|s| s.width() != w || s.height() != h) {
        return Err(Error::format("share dimensions", "shares differ in size"));
    }
    let (br, bc) = block_shape(sets.m());
    if w % bc != 0 || h % br != 0 {
        return Err(Error::format(
            "share dimensions",
            format!("{w}x{h} is not a multiple of the {bc}x{br} subpixel block"),
        ));
    }
    let stacked_pixels: Vec<u8> = (0..w * h)
        .map(|i| shares.iter().fold(0, |acc, s| acc | s.pixels()[i]))
        .collect();
    let stacked = BinaryImage::new(w, h, stacked_pixels)?;

    let (ow, oh) = (w / bc, h / br);
    let mut decoded = Vec::with_capacity(ow * oh);
    for row in 0..oh {
        for col in 0..ow {
            let mut weight = 0;
            for dr in 0..br {
                for dc in 0..bc {
                    weight += stacked.get(row * br + dr, col * bc + dc).bit() as usize;
                }
            }
            decoded.push(u8::from(weight >= sets.threshold));
        }
    }
    Ok(ClassicalRecovery {
        stacked,
        decoded: BinaryImage::new(ow, oh, decoded)?,
    })
}

/// The original image with each pixel blown up to a solid block, i.e. what a
/// lossless recovery at the expanded size would look like.
pub fn expand_image(image: &BinaryImage, m: usize) -> Result<BinaryImage> {
    let (br, bc) = block_shape(m);
    let mut out = BinaryImage::filled(image.width() * bc, image.height() * br, Color::White)?;
    for row in 0..out.height() {
        for col in 0..out.width() {
            out.set(row, col, image.get(row / br, col / bc));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Color::{Black, White};

    fn columns(m: &BooleanShareMatrix) -> Vec<String> {
        (0..m.cols())
            .map(|k| (1..=m.rows()).map(|i| char::from(b'0' + m.get(i, k + 1))).collect())
            .collect()
    }

    #[test]
    fn two_participant_sets() {
        let sets = build_nn_matrix_sets(2).unwrap();
        assert_eq!(sets.m(), 2);
        assert_eq!(columns(sets.base(0)), ["00", "11"]);
        assert_eq!(columns(sets.base(1)), ["01", "10"]);
        assert_eq!(sets.threshold(), 2);
        assert_eq!(sets.relative_difference(), Ratio::new(1, 2));
    }

    #[test]
    fn three_participant_stacks() {
        let sets = build_nn_matrix_sets(3).unwrap();
        assert_eq!(sets.m(), 4);
        for member in sets.members(0).unwrap() {
            assert_eq!(stack_and_weight(&member, &[1, 2, 3]).unwrap().1, 3);
        }
        for member in sets.members(1).unwrap() {
            assert_eq!(stack_and_weight(&member, &[1, 2, 3]).unwrap().1, 4);
        }
    }

    #[test]
    fn stacking_errors_and_zero_row() {
        let zero = BooleanShareMatrix::new(1, 4, vec![0; 4]).unwrap();
        assert_eq!(stack_and_weight(&zero, &[1]).unwrap(), (vec![0; 4], 0));
        assert!(stack_and_weight(&zero, &[]).is_err());
        assert!(stack_and_weight(&zero, &[2]).is_err());
    }

    #[test]
    fn share_pixel_membership() {
        let sets = build_nn_matrix_sets(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let white_members = sets.members(0).unwrap();
        for _ in 0..10 {
            let s = classical_share_pixel(White, &sets, &mut rng);
            assert!(white_members.contains(&s));
            let b = classical_share_pixel(Black, &sets, &mut rng);
            assert!(b.row(1).iter().zip(b.row(2)).all(|(x, y)| x ^ y == 1));
        }
        let a = classical_share_pixel(Black, &sets, &mut ChaCha8Rng::seed_from_u64(1));
        let b = classical_share_pixel(Black, &sets, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn conditions_hold() {
        for n in 2..=6 {
            let check = check_conditions(&build_nn_matrix_sets(n).unwrap());
            assert!(check.valid(), "n = {n}: {check:?}");
            let m = 1usize << (n - 1);
            assert_eq!(check.white_weights, (m - 1, m - 1));
            assert_eq!(check.black_weights, (m, m));
        }
    }

    #[test]
    fn set_size_limits() {
        assert!(matches!(build_nn_matrix_sets(1), Err(Error::Argument(_))));
        assert!(matches!(build_nn_matrix_sets(13), Err(Error::Size(_))));
        assert!(build_nn_matrix_sets(5).unwrap().members(0).is_err());
    }

    #[test]
    fn block_shapes() {
        assert_eq!(block_shape(2), (1, 2));
        assert_eq!(block_shape(4), (2, 2));
        assert_eq!(block_shape(8), (2, 4));
        assert_eq!(block_shape(32), (4, 8));
    }

    #[test]
    fn single_white_pixel_stack() {
        let sets = build_nn_matrix_sets(2).unwrap();
        let img = BinaryImage::filled(1, 1, White).unwrap();
        let shares = classical_share_image(&img, &sets, 3).unwrap();
        let rec = classical_recover_image(&shares, &sets).unwrap();
        let weight: usize = rec.stacked.pixels().iter().map(|&p| p as usize).sum();
        assert_eq!(weight, 1);
        assert!(weight < sets.threshold());
        assert_eq!(rec.decoded, img);
    }

    #[test]
    fn worked_example_baseline() {
        let sets = build_nn_matrix_sets(3).unwrap();
        let img = BinaryImage::from_pixel_list(4, 1, &[White, Black, Black, White]).unwrap();
        let shares = classical_share_image(&img, &sets, 11).unwrap();
        assert_eq!(shares.len(), 3);
        for s in &shares {
            assert_eq!(s.pixel_count(), 16);
        }
        let rec = classical_recover_image(&shares, &sets).unwrap();
        assert_eq!(rec.decoded, img);
        // white blocks keep 3 of 4 subpixels black
        assert_ne!(rec.stacked, expand_image(&img, 4).unwrap());
    }

    #[test]
    fn mismatched_shares() {
        let sets = build_nn_matrix_sets(3).unwrap();
        let a = BinaryImage::filled(4, 2, White).unwrap();
        let b = BinaryImage::filled(2, 2, White).unwrap();
        assert!(matches!(classical_recover_image(&[a, b], &sets), Err(Error::Format { .. })));
        let odd = BinaryImage::filled(3, 2, White).unwrap();
        assert!(matches!(classical_recover_image(&[odd], &sets), Err(Error::Format { .. })));
    }
}

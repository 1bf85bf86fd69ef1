//! QR Code (model 2) encoder.
//!
//! Only what labels need: byte mode, error-correction level M, versions
//! 1 through 10. A canonical UUID (36 bytes) always lands in version 3,
//! a 29×29 module symbol.

use crate::IdentityError;

/// Largest version this encoder emits.
pub const MAX_VERSION: u8 = 10;

/// Light modules required around the symbol.
pub const QUIET_ZONE: usize = 4;

/// Block structure of one version at level M.
struct Blocks {
    ecc_per_block: usize,
    /// `(block count, data codewords per block)` for the two block groups.
    groups: [(usize, usize); 2],
}

const LEVEL_M: [Blocks; MAX_VERSION as usize] = [
    Blocks { ecc_per_block: 10, groups: [(1, 16), (0, 0)] },
    Blocks { ecc_per_block: 16, groups: [(1, 28), (0, 0)] },
    Blocks { ecc_per_block: 26, groups: [(1, 44), (0, 0)] },
    Blocks { ecc_per_block: 18, groups: [(2, 32), (0, 0)] },
    Blocks { ecc_per_block: 24, groups: [(2, 43), (0, 0)] },
    Blocks { ecc_per_block: 16, groups: [(4, 27), (0, 0)] },
    Blocks { ecc_per_block: 18, groups: [(4, 31), (0, 0)] },
    Blocks { ecc_per_block: 22, groups: [(2, 38), (2, 39)] },
    Blocks { ecc_per_block: 22, groups: [(3, 36), (2, 37)] },
    Blocks { ecc_per_block: 26, groups: [(4, 43), (1, 44)] },
];

const ALIGNMENT_CENTERS: [&[usize]; MAX_VERSION as usize] = [
    &[],
    &[6, 18],
    &[6, 22],
    &[6, 26],
    &[6, 30],
    &[6, 34],
    &[6, 22, 38],
    &[6, 24, 42],
    &[6, 26, 46],
    &[6, 28, 50],
];

/// Format-info indicator for level M.
const LEVEL_M_FORMAT_BITS: u32 = 0b00;

impl Blocks {
    fn data_codewords(&self) -> usize {
        self.groups.iter().map(|(n, len)| n * len).sum()
    }
}

/// An encoded symbol: a square grid of dark/light modules, without the
/// quiet zone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QrCode {
    version: u8,
    mask: u8,
    size: usize,
    modules: Vec<bool>,
}

impl std::fmt::Debug for QrCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QrCode v{} mask {}", self.version, self.mask)?;
        for y in 0..self.size {
            let row: String = (0..self.size).map(|x| if self.is_dark(x, y) { '#' } else { '.' }).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl QrCode {
    /// Encodes `data` in byte mode using the smallest version that fits.
    pub fn encode_bytes(data: &[u8]) -> Result<Self, IdentityError> {
        let version = (1..=MAX_VERSION)
            .find(|&v| data_bits_needed(v, data.len()) <= LEVEL_M[v as usize - 1].data_codewords() * 8)
            .ok_or(IdentityError::PayloadTooLong(data.len()))?;
        let codewords = add_error_correction(version, &data_codewords(version, data));

        let mut builder = Builder::new(version);
        builder.draw_function_patterns();
        builder.draw_codewords(&codewords);

        let mask = (0..8u8)
            .min_by_key(|&mask| {
                let mut candidate = builder.clone();
                candidate.apply_mask(mask);
                candidate.draw_format_bits(mask);
                candidate.penalty()
            })
            .expect("eight masks");
        builder.apply_mask(mask);
        builder.draw_format_bits(mask);

        Ok(QrCode { version, mask, size: builder.size, modules: builder.modules })
    }

    pub fn version(&self) -> u8 {
        self.version
    }

    pub fn mask(&self) -> u8 {
        self.mask
    }

    /// Side length in modules, without quiet zone.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Module at column `x`, row `y`. Out-of-range coordinates are light.
    pub fn is_dark(&self, x: usize, y: usize) -> bool {
        x < self.size && y < self.size && self.modules[y * self.size + x]
    }

    /// Horizontal runs of dark modules per row, as `(x, y, width)`.
    pub fn dark_runs(&self) -> Vec<(usize, usize, usize)> {
        let mut runs = Vec::new();
        for y in 0..self.size {
            let mut x = 0;
            while x < self.size {
                if self.is_dark(x, y) {
                    let start = x;
                    while x < self.size && self.is_dark(x, y) {
                        x += 1;
                    }
                    runs.push((start, y, x - start));
                } else {
                    x += 1;
                }
            }
        }
        runs
    }
}

fn char_count_bits(version: u8) -> usize {
    if version <= 9 {
        8
    } else {
        16
    }
}

fn data_bits_needed(version: u8, len: usize) -> usize {
    4 + char_count_bits(version) + 8 * len
}

struct BitBuffer(Vec<bool>);

impl BitBuffer {
    fn push(&mut self, value: u32, bits: usize) {
        for i in (0..bits).rev() {
            self.0.push((value >> i) & 1 == 1);
        }
    }
}

/// Mode indicator, length, payload, terminator and padding.
fn data_codewords(version: u8, data: &[u8]) -> Vec<u8> {
    let capacity_bits = LEVEL_M[version as usize - 1].data_codewords() * 8;
    let mut bits = BitBuffer(Vec::with_capacity(capacity_bits));
    bits.push(0b0100, 4);
    bits.push(data.len() as u32, char_count_bits(version));
    for &byte in data {
        bits.push(byte.into(), 8);
    }
    let terminator = (capacity_bits - bits.0.len()).min(4);
    bits.push(0, terminator);
    let to_byte = (8 - bits.0.len() % 8) % 8;
    bits.push(0, to_byte);
    for pad in [0xEC, 0x11].into_iter().cycle() {
        if bits.0.len() >= capacity_bits {
            break;
        }
        bits.push(pad, 8);
    }

    bits.0.chunks(8).map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b))).collect()
}

/// Multiplication in GF(2^8) modulo x^8 + x^4 + x^3 + x^2 + 1.
fn gf_mul(x: u8, y: u8) -> u8 {
    let mut z: u8 = 0;
    for i in (0..8).rev() {
        z = (z << 1) ^ ((z >> 7) * 0x1D);
        z ^= ((y >> i) & 1) * x;
    }
    z
}

/// Coefficients of prod_{i<degree} (x - a^i), highest power omitted.
fn rs_generator(degree: usize) -> Vec<u8> {
    let mut poly = vec![0u8; degree];
    poly[degree - 1] = 1;
    let mut root: u8 = 1;
    for _ in 0..degree {
        for j in 0..degree {
            poly[j] = gf_mul(poly[j], root);
            if j + 1 < degree {
                poly[j] ^= poly[j + 1];
            }
        }
        root = gf_mul(root, 0x02);
    }
    poly
}

fn rs_remainder(data: &[u8], generator: &[u8]) -> Vec<u8> {
    let mut rem = vec![0u8; generator.len()];
    for &byte in data {
        let factor = byte ^ rem.remove(0);
        rem.push(0);
        for (r, &g) in rem.iter_mut().zip(generator) {
            *r ^= gf_mul(g, factor);
        }
    }
    rem
}

/// Splits into blocks, appends Reed-Solomon codewords and interleaves.
fn add_error_correction(version: u8, data: &[u8]) -> Vec<u8> {
    let layout = &LEVEL_M[version as usize - 1];
    let generator = rs_generator(layout.ecc_per_block);

    let mut blocks: Vec<(&[u8], Vec<u8>)> = Vec::new();
    let mut rest = data;
    for &(count, len) in &layout.groups {
        for _ in 0..count {
            let (block, tail) = rest.split_at(len);
            blocks.push((block, rs_remainder(block, &generator)));
            rest = tail;
        }
    }
    debug_assert!(rest.is_empty());

    let longest = blocks.iter().map(|(d, _)| d.len()).max().unwrap_or(0);
    let mut out = Vec::with_capacity(data.len() + blocks.len() * layout.ecc_per_block);
    for i in 0..longest {
        out.extend(blocks.iter().filter_map(|(d, _)| d.get(i)));
    }
    for i in 0..layout.ecc_per_block {
        out.extend(blocks.iter().map(|(_, ecc)| ecc[i]));
    }
    out
}

#[derive(Clone)]
struct Builder {
    version: u8,
    size: usize,
    modules: Vec<bool>,
    is_function: Vec<bool>,
}

impl Builder {
    fn new(version: u8) -> Self {
        let size = version as usize * 4 + 17;
        Self { version, size, modules: vec![false; size * size], is_function: vec![false; size * size] }
    }

    fn get(&self, x: usize, y: usize) -> bool {
        self.modules[y * self.size + x]
    }

    fn set_function(&mut self, x: usize, y: usize, dark: bool) {
        let i = y * self.size + x;
        self.modules[i] = dark;
        self.is_function[i] = true;
    }

    fn draw_function_patterns(&mut self) {
        let size = self.size;
        for i in 0..size {
            self.set_function(6, i, i % 2 == 0);
            self.set_function(i, 6, i % 2 == 0);
        }

        for (cx, cy) in [(3, 3), (size - 4, 3), (3, size - 4)] {
            for dy in -4i32..=4 {
                for dx in -4i32..=4 {
                    let (x, y) = (cx as i32 + dx, cy as i32 + dy);
                    if (0..size as i32).contains(&x) && (0..size as i32).contains(&y) {
                        let dist = dx.abs().max(dy.abs());
                        self.set_function(x as usize, y as usize, dist != 2 && dist != 4);
                    }
                }
            }
        }

        let centers = ALIGNMENT_CENTERS[self.version as usize - 1];
        let last = centers.len().saturating_sub(1);
        for (i, &cx) in centers.iter().enumerate() {
            for (j, &cy) in centers.iter().enumerate() {
                // Skip the three corners occupied by finder patterns.
                if (i == 0 && j == 0) || (i == 0 && j == last) || (i == last && j == 0) {
                    continue;
                }
                for dy in -2i32..=2 {
                    for dx in -2i32..=2 {
                        let x = (cx as i32 + dx) as usize;
                        let y = (cy as i32 + dy) as usize;
                        self.set_function(x, y, dx.abs().max(dy.abs()) != 1);
                    }
                }
            }
        }

        // Reserve format areas; real bits are drawn after masking.
        self.draw_format_bits(0);
        self.draw_version_bits();
    }

    fn draw_format_bits(&mut self, mask: u8) {
        let data = (LEVEL_M_FORMAT_BITS << 3) | u32::from(mask);
        let mut rem = data;
        for _ in 0..10 {
            rem = (rem << 1) ^ ((rem >> 9) * 0x537);
        }
        let bits = ((data << 10) | rem) ^ 0x5412;
        let bit = |i: usize| (bits >> i) & 1 == 1;
        let size = self.size;

        for i in 0..=5 {
            self.set_function(8, i, bit(i));
        }
        self.set_function(8, 7, bit(6));
        self.set_function(8, 8, bit(7));
        self.set_function(7, 8, bit(8));
        for i in 9..15 {
            self.set_function(14 - i, 8, bit(i));
        }

        for i in 0..8 {
            self.set_function(size - 1 - i, 8, bit(i));
        }
        for i in 8..15 {
            self.set_function(8, size - 15 + i, bit(i));
        }
        self.set_function(8, size - 8, true);
    }

    fn draw_version_bits(&mut self) {
        if self.version < 7 {
            return;
        }
        let version = u32::from(self.version);
        let mut rem = version;
        for _ in 0..12 {
            rem = (rem << 1) ^ ((rem >> 11) * 0x1F25);
        }
        let bits = (version << 12) | rem;
        for i in 0..18 {
            let dark = (bits >> i) & 1 == 1;
            let a = self.size - 11 + i % 3;
            let b = i / 3;
            self.set_function(a, b, dark);
            self.set_function(b, a, dark);
        }
    }

    /// Zig-zag placement from the bottom-right corner, two columns at a
    /// time, skipping the vertical timing pattern.
    fn draw_codewords(&mut self, codewords: &[u8]) {
        let size = self.size as i32;
        let total_bits = codewords.len() * 8;
        let mut i = 0usize;
        let mut right = size - 1;
        while right >= 1 {
            if right == 6 {
                right = 5;
            }
            for vert in 0..size {
                for j in 0..2 {
                    let x = (right - j) as usize;
                    let upward = (right + 1) & 2 == 0;
                    let y = if upward { size - 1 - vert } else { vert } as usize;
                    if !self.is_function[y * self.size + x] && i < total_bits {
                        self.modules[y * self.size + x] = (codewords[i >> 3] >> (7 - (i & 7))) & 1 == 1;
                        i += 1;
                    }
                }
            }
            right -= 2;
        }
        debug_assert_eq!(i, total_bits);
    }

    fn apply_mask(&mut self, mask: u8) {
        for y in 0..self.size {
            for x in 0..self.size {
                let idx = y * self.size + x;
                if !self.is_function[idx] && mask_bit(mask, x, y) {
                    self.modules[idx] = !self.modules[idx];
                }
            }
        }
    }

    fn penalty(&self) -> u32 {
        let size = self.size;
        let rows = (0..size).map(|y| (0..size).map(|x| self.get(x, y)).collect::<Vec<_>>());
        let cols = (0..size).map(|x| (0..size).map(|y| self.get(x, y)).collect::<Vec<_>>());
        let mut score = 0u32;

        for line in rows.chain(cols) {
            // Runs of five or more.
            let mut run = 1;
            for i in 1..=line.len() {
                if i < line.len() && line[i] == line[i - 1] {
                    run += 1;
                } else {
                    if run >= 5 {
                        score += 3 + (run - 5);
                    }
                    run = 1;
                }
            }
            // Finder-like 1:1:3:1:1 with four light modules on one side.
            const FINDER: [bool; 11] =
                [true, false, true, true, true, false, true, false, false, false, false];
            for window in line.windows(11) {
                if window == FINDER || window.iter().rev().eq(FINDER.iter()) {
                    score += 40;
                }
            }
        }

        for y in 0..size - 1 {
            for x in 0..size - 1 {
                let c = self.get(x, y);
                if c == self.get(x + 1, y) && c == self.get(x, y + 1) && c == self.get(x + 1, y + 1) {
                    score += 3;
                }
            }
        }

        let total = (size * size) as i64;
        let dark = self.modules.iter().filter(|&&m| m).count() as i64;
        let k = ((dark * 20 - total * 10).abs() + total - 1) / total - 1;
        score + (k.max(0) as u32) * 10
    }
}

fn mask_bit(mask: u8, x: usize, y: usize) -> bool {
    let (i, j) = (y, x);
    match mask {
        0 => (i + j) % 2 == 0,
        1 => i % 2 == 0,
        2 => j % 3 == 0,
        3 => (i + j) % 3 == 0,
        4 => (i / 2 + j / 3) % 2 == 0,
        5 => (i * j) % 2 + (i * j) % 3 == 0,
        6 => ((i * j) % 2 + (i * j) % 3) % 2 == 0,
        7 => ((i + j) % 2 + (i * j) % 3) % 2 == 0,
        _ => unreachable!("mask pattern {mask}"),
    }
}

//! Grid values and the attribute accessors exposed to programs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest side length a task I/O grid may have.
pub const MAX_TASK_DIM: usize = 30;

/// Hard cap on either side of any grid produced during execution.
pub const GRID_HARD_CAP: usize = 64;

/// Number of distinct colors.
pub const NUM_COLORS: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("grid must have at least one row and one column")]
    Empty,
    #[error("row {row} has length {len}, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("color {0} is outside 0..=9")]
    BadColor(i64),
    #[error("grid dimensions {width}x{height} exceed the cap of {cap}")]
    TooLarge { width: usize, height: usize, cap: usize },
}

/// The nine grid attributes a program can select with a `.attr` argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    X,
    Y,
    C,
    Width,
    Height,
    MaxX,
    MaxY,
    UlX,
    UlY,
}

impl Attribute {
    pub const ALL: [Attribute; 9] = [
        Attribute::X,
        Attribute::Y,
        Attribute::C,
        Attribute::Width,
        Attribute::Height,
        Attribute::MaxX,
        Attribute::MaxY,
        Attribute::UlX,
        Attribute::UlY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::X => "x",
            Attribute::Y => "y",
            Attribute::C => "c",
            Attribute::Width => "width",
            Attribute::Height => "height",
            Attribute::MaxX => "max_x",
            Attribute::MaxY => "max_y",
            Attribute::UlX => "ul_x",
            Attribute::UlY => "ul_y",
        }
    }

    pub fn from_name(name: &str) -> Option<Attribute> {
        Attribute::ALL.iter().copied().find(|a| a.name() == name)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of reading an attribute: coordinate/color lists or a scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrValue {
    List(Vec<i64>),
    Int(i64),
}

/// A rectangular grid of colors 0..=9 with an upper-left offset.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    ul_x: usize,
    ul_y: usize,
}

impl Grid {
    /// Builds a grid from rows, checking shape and color range. Sides may be
    /// as large as [`GRID_HARD_CAP`]; task-level limits are enforced elsewhere.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Grid, GridError> {
        let height = rows.len();
        if height == 0 {
            return Err(GridError::Empty);
        }
        let width = rows[0].as_ref().len();
        if width == 0 {
            return Err(GridError::Empty);
        }
        check_dims(width, height)?;
        let mut cells = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(GridError::Ragged { row: i, len: row.len(), expected: width });
            }
            for &c in row {
                if c >= NUM_COLORS {
                    return Err(GridError::BadColor(c as i64));
                }
            }
            cells.extend_from_slice(row);
        }
        Ok(Grid { width, height, cells, ul_x: 0, ul_y: 0 })
    }

    /// A `width` x `height` grid filled with one color.
    pub fn filled(width: usize, height: usize, color: u8) -> Result<Grid, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::Empty);
        }
        check_dims(width, height)?;
        if color >= NUM_COLORS {
            return Err(GridError::BadColor(color as i64));
        }
        Ok(Grid { width, height, cells: vec![color; width * height], ul_x: 0, ul_y: 0 })
    }

    pub fn with_offset(mut self, ul_x: usize, ul_y: usize) -> Grid {
        self.ul_x = ul_x;
        self.ul_y = ul_y;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ul_x(&self) -> usize {
        self.ul_x
    }

    pub fn ul_y(&self) -> usize {
        self.ul_y
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * self.width + x]
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, color: u8) {
        self.cells[y * self.width + x] = color;
    }

    /// Row-major cell colors.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks(self.width)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn is_task_sized(&self) -> bool {
        self.width <= MAX_TASK_DIM && self.height <= MAX_TASK_DIM
    }

    /// Grows the grid to at least `width` x `height`, padding with color 0.
    pub(crate) fn extend_to(&mut self, width: usize, height: usize) -> Result<(), GridError> {
        if width <= self.width && height <= self.height {
            return Ok(());
        }
        let new_w = width.max(self.width);
        let new_h = height.max(self.height);
        check_dims(new_w, new_h)?;
        let mut cells = vec![0u8; new_w * new_h];
        for y in 0..self.height {
            let src = &self.cells[y * self.width..(y + 1) * self.width];
            cells[y * new_w..y * new_w + self.width].copy_from_slice(src);
        }
        self.cells = cells;
        self.width = new_w;
        self.height = new_h;
        Ok(())
    }

    /// Top-left `width` x `height` sub-grid. Caller guarantees the bounds.
    pub(crate) fn crop_top_left(&self, width: usize, height: usize) -> Grid {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            cells.extend_from_slice(&self.cells[y * self.width..y * self.width + width]);
        }
        Grid { width, height, cells, ul_x: self.ul_x, ul_y: self.ul_y }
    }

    pub fn attr(&self, attr: Attribute) -> AttrValue {
        let n = self.width * self.height;
        match attr {
            Attribute::X => AttrValue::List((0..n).map(|i| (i % self.width) as i64).collect()),
            Attribute::Y => AttrValue::List((0..n).map(|i| (i / self.width) as i64).collect()),
            Attribute::C => AttrValue::List(self.cells.iter().map(|&c| c as i64).collect()),
            Attribute::Width => AttrValue::Int(self.width as i64),
            Attribute::Height => AttrValue::Int(self.height as i64),
            Attribute::MaxX => AttrValue::Int(self.width as i64 - 1),
            Attribute::MaxY => AttrValue::Int(self.height as i64 - 1),
            Attribute::UlX => AttrValue::Int(self.ul_x as i64),
            Attribute::UlY => AttrValue::Int(self.ul_y as i64),
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), GridError> {
    if width > GRID_HARD_CAP || height > GRID_HARD_CAP {
        return Err(GridError::TooLarge { width, height, cap: GRID_HARD_CAP });
    }
    Ok(())
}

/// Solution-check equality: same shape and cells. Offsets are ignored.
pub fn grids_equal(a: &Grid, b: &Grid) -> bool {
    a.width == b.width && a.height == b.height && a.cells == b.cells
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid{}x{}[", self.width, self.height)?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for c in row {
                write!(f, "{c}")?;
            }
        }
        f.write_str("]")
    }
}

//! Processor-grid geometry and block-checkerboard distribution.
//!
//! Ranks are numbered row-major: `rank = row * cols + col`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Position of a rank in the flat `s x t` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCoord {
    pub row: usize,
    pub col: usize,
}

/// An `s x t` processor grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
}

pub fn make_grid(s: usize, t: usize) -> Result<GridSpec> {
    if s == 0 {
        return Err(Error::ZeroExtent { what: "grid rows" });
    }
    if t == 0 {
        return Err(Error::ZeroExtent {
            what: "grid columns",
        });
    }
    Ok(GridSpec { rows: s, cols: t })
}

impl GridSpec {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn size(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn rank_of(&self, coord: GridCoord) -> usize {
        assert!(coord.row < self.rows && coord.col < self.cols);
        coord.row * self.cols + coord.col
    }

    pub fn coord_of(&self, rank: usize) -> GridCoord {
        assert!(rank < self.size(), "rank {rank} outside grid");
        GridCoord {
            row: rank / self.cols,
            col: rank % self.cols,
        }
    }

    /// Ranks of processor row `row`, ordered by column.
    pub fn row_ranks(&self, row: usize) -> Vec<usize> {
        (0..self.cols).map(|col| row * self.cols + col).collect()
    }

    /// Ranks of processor column `col`, ordered by row.
    pub fn col_ranks(&self, col: usize) -> Vec<usize> {
        (0..self.rows).map(|row| row * self.cols + col).collect()
    }
}

/// Four-index coordinate `P(x,y)(i,j)`: processor `(i, j)` inside group `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupedCoord {
    pub group_row: usize,
    pub group_col: usize,
    pub inner_row: usize,
    pub inner_col: usize,
}

/// The base grid partitioned into an `I x J` arrangement of groups, each an
/// `(s/I) x (t/J)` grid of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupedGridSpec {
    base: GridSpec,
    group_rows: usize,
    group_cols: usize,
}

pub fn make_grouped_grid(
    base: GridSpec,
    group_rows: usize,
    group_cols: usize,
) -> Result<GroupedGridSpec> {
    if group_rows == 0 {
        return Err(Error::ZeroExtent { what: "group rows" });
    }
    if group_cols == 0 {
        return Err(Error::ZeroExtent {
            what: "group columns",
        });
    }
    if base.rows % group_rows != 0 {
        return Err(Error::Divisibility {
            what: "grid rows",
            value: base.rows as u64,
            divisor: group_rows as u64,
        });
    }
    if base.cols % group_cols != 0 {
        return Err(Error::Divisibility {
            what: "grid columns",
            value: base.cols as u64,
            divisor: group_cols as u64,
        });
    }
    Ok(GroupedGridSpec {
        base,
        group_rows,
        group_cols,
    })
}

impl GroupedGridSpec {
    /// The trivial grouping with a single group spanning the grid.
    pub fn single(base: GridSpec) -> Self {
        Self {
            base,
            group_rows: 1,
            group_cols: 1,
        }
    }

    pub fn base(&self) -> GridSpec {
        self.base
    }

    /// `I`
    pub fn group_rows(&self) -> usize {
        self.group_rows
    }

    /// `J`
    pub fn group_cols(&self) -> usize {
        self.group_cols
    }

    /// `G = I * J`
    pub fn group_count(&self) -> usize {
        self.group_rows * self.group_cols
    }

    /// `s / I`
    pub fn inner_rows(&self) -> usize {
        self.base.rows / self.group_rows
    }

    /// `t / J`
    pub fn inner_cols(&self) -> usize {
        self.base.cols / self.group_cols
    }

    pub fn coord_of(&self, rank: usize) -> GroupedCoord {
        let GridCoord { row, col } = self.base.coord_of(rank);
        GroupedCoord {
            group_row: row / self.inner_rows(),
            group_col: col / self.inner_cols(),
            inner_row: row % self.inner_rows(),
            inner_col: col % self.inner_cols(),
        }
    }

    pub fn rank_of(&self, c: GroupedCoord) -> usize {
        assert!(c.group_row < self.group_rows && c.group_col < self.group_cols);
        assert!(c.inner_row < self.inner_rows() && c.inner_col < self.inner_cols());
        self.base.rank_of(GridCoord {
            row: c.group_row * self.inner_rows() + c.inner_row,
            col: c.group_col * self.inner_cols() + c.inner_col,
        })
    }

    /// Ranks of group `(x, y)` in row-major inner order.
    pub fn group_members(&self, group_row: usize, group_col: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.inner_rows() * self.inner_cols());
        for inner_row in 0..self.inner_rows() {
            for inner_col in 0..self.inner_cols() {
                out.push(self.rank_of(GroupedCoord {
                    group_row,
                    group_col,
                    inner_row,
                    inner_col,
                }));
            }
        }
        out
    }

    /// `P(x,*)(i,j)`: the homologous ranks of `rank` in every group of its
    /// group row, ordered by group column.
    pub fn group_row_comm(&self, rank: usize) -> Vec<usize> {
        let c = self.coord_of(rank);
        (0..self.group_cols)
            .map(|group_col| self.rank_of(GroupedCoord { group_col, ..c }))
            .collect()
    }

    /// `P(*,y)(i,j)`, ordered by group row.
    pub fn group_col_comm(&self, rank: usize) -> Vec<usize> {
        let c = self.coord_of(rank);
        (0..self.group_rows)
            .map(|group_row| self.rank_of(GroupedCoord { group_row, ..c }))
            .collect()
    }

    /// `P(x,y)(i,*)`: the processor row of `rank` inside its group.
    pub fn row_comm(&self, rank: usize) -> Vec<usize> {
        let c = self.coord_of(rank);
        (0..self.inner_cols())
            .map(|inner_col| self.rank_of(GroupedCoord { inner_col, ..c }))
            .collect()
    }

    /// `P(x,y)(*,j)`: the processor column of `rank` inside its group.
    pub fn col_comm(&self, rank: usize) -> Vec<usize> {
        let c = self.coord_of(rank);
        (0..self.inner_rows())
            .map(|inner_row| self.rank_of(GroupedCoord { inner_row, ..c }))
            .collect()
    }
}

/// Block-checkerboard layout of an `n x n` matrix over a grid, with panel
/// width `block`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockLayout {
    n: usize,
    block: usize,
    grid: GridSpec,
}

impl BlockLayout {
    pub fn new(n: usize, block: usize, grid: GridSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroExtent {
                what: "matrix dimension",
            });
        }
        if block == 0 {
            return Err(Error::ZeroExtent { what: "block size" });
        }
        if n % block != 0 {
            return Err(Error::Divisibility {
                what: "n",
                value: n as u64,
                divisor: block as u64,
            });
        }
        if n % grid.rows() != 0 {
            return Err(Error::Divisibility {
                what: "n",
                value: n as u64,
                divisor: grid.rows() as u64,
            });
        }
        if n % grid.cols() != 0 {
            return Err(Error::Divisibility {
                what: "n",
                value: n as u64,
                divisor: grid.cols() as u64,
            });
        }
        Ok(Self { n, block, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// `n / s`
    pub fn tile_rows(&self) -> usize {
        self.n / self.grid.rows()
    }

    /// `n / t`
    pub fn tile_cols(&self) -> usize {
        self.n / self.grid.cols()
    }

    /// Rank owning global element `(i, j)` and the local index inside its tile.
    pub fn owner_of(&self, i: usize, j: usize) -> (usize, usize, usize) {
        let (tr, tc) = (self.tile_rows(), self.tile_cols());
        let rank = self.grid.rank_of(GridCoord {
            row: i / tr,
            col: j / tc,
        });
        (rank, i % tr, j % tc)
    }
}

/// A dense matrix split into one tile per rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix {
    layout: BlockLayout,
    tiles: Vec<Matrix>,
}

impl DistMatrix {
    pub fn zeros(layout: BlockLayout) -> Self {
        let tiles = (0..layout.grid.size())
            .map(|_| Matrix::zeros(layout.tile_rows(), layout.tile_cols()))
            .collect();
        Self { layout, tiles }
    }

    /// Builds from per-rank tiles, checking every tile has the layout's shape.
    pub fn from_tiles(layout: BlockLayout, tiles: Vec<Matrix>) -> Result<Self> {
        if tiles.len() != layout.grid.size() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} tiles", layout.grid.size()),
                actual: format!("{} tiles", tiles.len()),
            });
        }
        let want = (layout.tile_rows(), layout.tile_cols());
        if let Some(t) = tiles.iter().find(|t| (t.rows(), t.cols()) != want) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} tile", want.0, want.1),
                actual: format!("{}x{} tile", t.rows(), t.cols()),
            });
        }
        Ok(Self { layout, tiles })
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    pub fn tile(&self, rank: usize) -> &Matrix {
        &self.tiles[rank]
    }

    pub fn tile_mut(&mut self, rank: usize) -> &mut Matrix {
        &mut self.tiles[rank]
    }

    pub fn tiles(&self) -> &[Matrix] {
        &self.tiles
    }
}

/// Splits `global` so the tile of rank `(r, c)` holds rows
/// `[r*n/s, (r+1)*n/s)` and columns `[c*n/t, (c+1)*n/t)`.
pub fn scatter_matrix(global: &Matrix, layout: BlockLayout) -> Result<DistMatrix> {
    if global.rows() != layout.n || global.cols() != layout.n {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", layout.n),
            actual: format!("{}x{}", global.rows(), global.cols()),
        });
    }
    let (tr, tc) = (layout.tile_rows(), layout.tile_cols());
    let tiles = (0..layout.grid.size())
        .map(|rank| {
            let GridCoord { row, col } = layout.grid.coord_of(rank);
            global.block(row * tr, col * tc, tr, tc)
        })
        .collect();
    Ok(DistMatrix { layout, tiles })
}

pub fn gather_matrix(dist: &DistMatrix) -> Matrix {
    let layout = dist.layout;
    let (tr, tc) = (layout.tile_rows(), layout.tile_cols());
    let mut global = Matrix::zeros(layout.n, layout.n);
    for (rank, tile) in dist.tiles.iter().enumerate() {
        let GridCoord { row, col } = layout.grid.coord_of(rank);
        global.set_block(row * tr, col * tc, tile);
    }
    global
}

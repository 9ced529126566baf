// Processor grids, two-level grouping and block distribution.

use hsumma::{gather_matrix, make_grid, make_grouped_grid, scatter_matrix, BlockLayout, GridCoord, Matrix};

fn main() {
    let grid = make_grid(4, 4).unwrap();
    let rank = grid.rank_of(GridCoord { row: 2, col: 3 });
    println!("rank of (2,3) on a 4x4 grid: {rank}");

    let grouped = make_grouped_grid(make_grid(6, 6).unwrap(), 3, 3).unwrap();
    println!(
        "6x6 grid in 3x3 groups: {} groups of {}x{}",
        grouped.group_count(),
        grouped.inner_rows(),
        grouped.inner_cols()
    );
    let c = grouped.coord_of(grid_rank(6, 3, 1));
    println!(
        "rank at (3,1) is inner ({},{}) of group ({},{})",
        c.inner_row, c.inner_col, c.group_row, c.group_col
    );
    println!("its between-group row communicator: {:?}", grouped.group_row_comm(grid_rank(6, 3, 1)));
    println!("its row communicator inside the group: {:?}", grouped.row_comm(grid_rank(6, 3, 1)));

    let layout = BlockLayout::new(8, 2, make_grid(2, 2).unwrap()).unwrap();
    let a = Matrix::from_fn(8, 8, |i, j| (10 * i + j) as f64);
    let dist = scatter_matrix(&a, layout).unwrap();
    let (owner, li, lj) = layout.owner_of(5, 2);
    println!("A[5][2] = {} lives on rank {owner} at ({li},{lj})", dist.tile(owner)[(li, lj)]);
    assert_eq!(gather_matrix(&dist), a);
    println!("gather(scatter(A)) == A");
}

fn grid_rank(cols: usize, row: usize, col: usize) -> usize {
    row * cols + col
}

// Predicted SUMMA and HSUMMA execution time on a 2^20-core exascale
// machine for G = 1, 2, 4, ..., 2^20.

use hsumma::experiment::predict_exascale;

fn main() {
    let table = predict_exascale().unwrap();
    print!("{}", table.to_csv());

    let best = table
        .rows
        .iter()
        .min_by(|a, b| a.time_mean.unwrap().total_cmp(&b.time_mean.unwrap()))
        .unwrap();
    let summa: f64 = table.rows[0].extra[1].parse().unwrap();
    println!(
        "\nSUMMA {summa:.3} s; HSUMMA best {:.3} s at G = {} ({:.2}x faster)",
        best.time_mean.unwrap(),
        best.key,
        summa / best.time_mean.unwrap()
    );
}

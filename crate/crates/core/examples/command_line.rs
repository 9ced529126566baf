// Drives the `hsumma` command line in-process. A config file supplies the
// machine, flags override it.

use std::io::Write;

use hsumma::experiment::cli;

fn main() {
    let dir = std::env::temp_dir().join(format!("hsumma-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("desk.conf");
    let mut f = std::fs::File::create(&config).unwrap();
    writeln!(f, "# desk-scale machine\nalpha = 1e-4\nbeta = 1e-9\nbcast = binomial\nb = 2").unwrap();

    let config = config.to_str().unwrap();
    for args in [
        vec!["simulate", "--config", config, "--n", "16", "--grid", "4x4", "--groups", "2x2", "--B", "4", "--seed", "7"],
        vec!["cost", "--config", config, "--n", "1024", "--p", "256", "--b", "32", "--bcast", "van-de-geijn"],
    ] {
        println!("$ hsumma {}", args.join(" "));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli::run(std::iter::once("hsumma").chain(args), &mut out, &mut err);
        print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
        println!("exit {code}\n");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

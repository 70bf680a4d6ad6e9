use levyheat::config::RunConfig;
use levyheat::pipeline;
use std::time::Instant;

const SKEW: &str = r#"
seed = 7
[profile]
family = "stable"
alpha = 1.0
d = 1
declared_alpha_h = 1.0
declared_beta_h = 1.0
[coefficient]
family = "skew_truncated"
a = 0.4
z0 = 0.5
kappa0 = 1.0
kappa1 = 1.4
kappa2 = 0.4
beta = 0.95
kappa3 = 0.15
kappa4 = 0.15
[grids]
t_min = 0.015625
t_out = [0.5, 1.0, 2.0]
time_nodes = 40
space_radius = 12.0
space_nodes = 49
check_radius = 4.0
frequency_period = 1024.0
[series]
mesh_nodes = 12
[verifier]
ck_pair = [0.5, 0.5]
"#;

fn main() {
    let cfg: RunConfig = toml::from_str(SKEW).unwrap();
    cfg.validate().unwrap();
    let t0 = Instant::now();
    let build = pipeline::build_stage(&cfg, false).unwrap();
    println!("build took {:?}", t0.elapsed());
    let report = pipeline::verify_build(&build, None);
    println!("{}", report.render_table());
    // Diagnose the tail fit: ratio p/(tK(u)/u) along the right/left bands.
    let f = &build.p_kappa;
    for &t in &[0.5, 2.0] {
        let it = f.t_nodes.iter().position(|&v| (v - t).abs() < 1e-11).unwrap();
        let ix = f.x.exact_index(0.0).unwrap();
        print!("t={t} right band ratios: ");
        for iy in 0..f.y.n {
            let u = f.y.node(iy);
            if u >= 8.0 {
                let env = t * build.sf.k(u) / u;
                print!("({u:.2},{:.4}) ", f.at(it, ix, iy) / env);
            }
        }
        println!();
        print!("t={t} left band ratios:  ");
        for iy in 0..f.y.n {
            let u = f.y.node(iy);
            if u <= -8.0 {
                let env = t * build.sf.k(-u) / (-u);
                print!("({u:.2},{:.4}) ", f.at(it, ix, iy) / env);
            }
        }
        println!();
    }
}

//! Ships the bundled tinyasp solver alongside the main binary so a working
//! ASP system is always available as a subprocess.

fn main() {
    std::process::exit(tinyasp::run_cli(std::env::args().skip(1)));
}

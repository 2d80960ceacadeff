fn main() {
    std::process::exit(sphgeom::cli::run());
}

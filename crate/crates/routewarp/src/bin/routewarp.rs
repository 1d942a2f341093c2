fn main() {
    std::process::exit(routewarp::cli::run());
}

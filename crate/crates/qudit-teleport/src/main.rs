fn main() {
    std::process::exit(qudit_teleport::cli::run());
}

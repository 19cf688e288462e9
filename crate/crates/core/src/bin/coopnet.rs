fn main() {
    coopnet::cli::main();
}

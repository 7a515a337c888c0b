fn main() {
    hmass::cli::main();
}

fn main() {
    println!("rovib");
}

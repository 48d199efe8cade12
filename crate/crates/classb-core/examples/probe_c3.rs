fn main() {
    let args: Vec<String> = std::env::args().collect();
    let id: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let r = classb_core::selftest::run_one(id, 42);
    println!("criterion {} passed={} in {:.2}s: {}", r.id, r.passed, r.seconds, &r.details[..r.details.len().min(100)]);
}

//! Drives the experiment runner from code, as the `projdio` binary does.

pub fn run_example() -> projdio::Result<String> {
    let dir = std::env::temp_dir().join(format!("projdio-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let out = dir.join("enumerate.csv");
    let code = projdio::cli::main_with_args([
        "projdio",
        "enumerate",
        "--n",
        "1",
        "--bound",
        "2",
        "--out",
        out.to_str().expect("utf-8 path"),
    ]);
    let text = std::fs::read_to_string(&out)?;
    println!("exit {code}\n{text}");
    std::fs::remove_dir_all(&dir)?;
    Ok(text)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}

// Parses the bundled IDX files and re-encodes them byte for byte.

use pls_lab::harness::idx::{encode_images, encode_labels, parse_images, parse_labels};

fn run_example() -> pls_lab::Result<bool> {
    let dir = std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/mnist-subset"));
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read(&path).map_err(|e| pls_lab::Error::Io { path, source: e })
    };
    let image_bytes = read("train-images-idx3-ubyte")?;
    let label_bytes = read("train-labels-idx1-ubyte")?;
    let images = parse_images(&image_bytes)?;
    let labels = parse_labels(&label_bytes)?;
    println!("{} images of {}x{}, {} labels", images.n, images.rows, images.cols, labels.len());
    let same = encode_images(&images) == image_bytes && encode_labels(&labels) == label_bytes;
    println!("re-encoded bytes identical: {same}");
    Ok(same)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}

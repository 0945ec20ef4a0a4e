//! Reading a program image without a processor: symbols, functions and lines.

use luxdbg::image::ProgramImage;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let img = ProgramImage::from_file(&dir.join("images/counter.img.json")).unwrap();
    for s in img.list_symbols(None) {
        println!("{:<14} {:<10} {}", s.name, s.kind.name(), s.address);
    }
    let f = img.function("targetFunc").unwrap();
    println!("targetFunc entry {} in {}", f.entry, f.file);
    let l = img.addr_to_line(f.entry).unwrap();
    println!("pmem {} is {}:{}", f.entry, l.file, l.line);
    println!("counter.c:12 is pmem {}", img.line_to_addr("counter.c", 12).unwrap());
}

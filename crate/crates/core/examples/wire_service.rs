//! The NDJSON service, driven by a client on another thread.
//!
//! For a long-running server use the binary: `luxdbg --listen 4711`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

fn main() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let server = thread::spawn(move || luxdbg::service::serve_on(&mut luxdbg::session(), listener).unwrap());

    let mut out = TcpStream::connect(("127.0.0.1", port)).unwrap();
    let mut lines = BufReader::new(out.try_clone().unwrap()).lines();
    let requests = [
        r#"{"id":1,"op":"eval","cmd":"processor new lx16i p1; p1 load images/counter.img.json"}"#,
        r#"{"id":2,"op":"eval","cmd":"stop in targetFunc; resume"}"#,
        r#"{"id":3,"op":"eval","cmd":"r0"}"#,
        r#"{"id":4,"op":"shutdown"}"#,
    ];
    for r in requests {
        println!("> {r}");
        writeln!(out, "{r}").unwrap();
        // events arrive first, then the reply carrying the id
        for line in lines.by_ref() {
            let line = line.unwrap();
            println!("< {line}");
            if line.contains("\"id\"") {
                break;
            }
        }
    }
    server.join().unwrap();
}

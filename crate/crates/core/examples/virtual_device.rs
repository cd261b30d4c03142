// SPDX-License-Identifier: Apache-2.0

//! Serve the virtual device on a local port and talk to it.

use std::net::{TcpListener, TcpStream};
use std::thread;

use chaos_trng::bitstream::PostMode;
use chaos_trng::device::{serve_listener, Client, ClientError, Device};
use chaos_trng::RunConfig;

fn main() {
    let rc = RunConfig {
        post: PostMode::VonNeumann,
        ..RunConfig::default()
    };
    let mut device = Device::new(rc).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || serve_listener(&mut device, &listener, Some(1)));

    let mut client = Client::new(TcpStream::connect(addr).unwrap());
    println!("random {:02x?}", client.get_random(16).unwrap());
    println!("raw    {:?}", client.get_raw(12).unwrap());
    let diag = client.diag().unwrap();
    println!(
        "diag   score {:.4} occupancy {:.3} flags [{}]",
        diag.score, diag.max_occupancy, diag.flags
    );

    let status = client.get_status().unwrap();
    println!(
        "status cycle {} buffered {} B flags [{}]",
        status.cycle, status.buffered_bytes, status.flags
    );

    match client.set_config("k = 1") {
        Err(ClientError::Device(code)) => println!("k = 1 rejected with code {code:#04x}"),
        other => println!("unexpected {other:?}"),
    }
    client.set_config("seed = 99\npost = xor").unwrap();
    println!(
        "after SET_CONFIG cycle {}",
        client.get_status().unwrap().cycle
    );

    drop(client);
    server.join().unwrap().unwrap();
}

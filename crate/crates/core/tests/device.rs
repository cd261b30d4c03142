// SPDX-License-Identifier: Apache-2.0

use std::net::{TcpListener, TcpStream};
use std::thread;

use proptest::prelude::*;

use chaos_trng::device::{
    cmd, decode_frame, encode_frame, err, serve_listener, Client, ClientError, Device, Frame,
    FrameDecoder, FrameError, MAX_PAYLOAD,
};
use chaos_trng::quality::TamperFlags;
use chaos_trng::sim::Fault;
use chaos_trng::RunConfig;

fn decode_all(stream: &[u8]) -> Vec<Result<Frame, FrameError>> {
    let mut dec = FrameDecoder::new();
    dec.push(stream);
    let mut out = Vec::new();
    while let Some(r) = dec.next_frame() {
        out.push(r);
    }
    out.extend(dec.finish());
    out
}

proptest! {
    #[test]
    fn codec_roundtrip(c in any::<u8>(), payload in proptest::collection::vec(any::<u8>(), 0..600)) {
        let bytes = encode_frame(c, &payload).unwrap();
        prop_assert_eq!(bytes.len(), payload.len() + 6);
        let f = decode_frame(&bytes).unwrap();
        prop_assert_eq!(f.cmd, c);
        prop_assert_eq!(f.payload, payload);
    }

    #[test]
    fn single_bit_flip_is_detected(
        payload in proptest::collection::vec(any::<u8>(), 1..200),
        bit in any::<proptest::sample::Index>(),
    ) {
        let mut bytes = encode_frame(cmd::GET_RAW, &payload).unwrap();
        let i = bit.index(payload.len() * 8);
        bytes[4 + i / 8] ^= 1 << (i % 8);
        let bad_crc = matches!(decode_frame(&bytes), Err(FrameError::BadCrc { .. }));
        prop_assert!(bad_crc);
    }

    #[test]
    fn resync_after_garbage(
        garbage in proptest::collection::vec(any::<u8>(), 0..3000),
        payload in proptest::collection::vec(any::<u8>(), 0..100),
    ) {
        let f = Frame::new(cmd::SET_CONFIG, payload).unwrap();
        let mut stream = garbage;
        stream.extend(f.encode());
        let got = decode_all(&stream);
        prop_assert!(got.contains(&Ok(f)));
    }

    #[test]
    fn arbitrary_octets_never_panic(data in proptest::collection::vec(any::<u8>(), 0..5000)) {
        for f in decode_all(&data).into_iter().flatten() {
            prop_assert!(f.payload.len() <= MAX_PAYLOAD);
        }
        let _ = decode_frame(&data);
    }
}

fn spawn(device: Device) -> (std::net::SocketAddr, thread::JoinHandle<Device>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let h = thread::spawn(move || {
        let mut device = device;
        serve_listener(&mut device, &listener, Some(1)).unwrap();
        device
    });
    (addr, h)
}

#[test]
fn tcp_session() {
    let (addr, h) = spawn(Device::new(RunConfig::default()).unwrap());
    let mut c = Client::new(TcpStream::connect(addr).unwrap());
    let a = c.get_random(4096).unwrap();
    let b = c.get_random(4096).unwrap();
    assert_eq!(a.len(), 4096);
    assert_ne!(a, b);
    assert_eq!(c.get_raw(2048).unwrap().len(), 2048);
    let st = c.get_status().unwrap();
    assert!(st.flags.is_empty());
    assert!(st.cycle > 2048);
    assert!(matches!(
        c.set_config("k = 1"),
        Err(ClientError::Device(err::BAD_PARAMS))
    ));
    assert!(matches!(
        c.request(0x77, &[]),
        Err(ClientError::Device(err::UNKNOWN_CMD))
    ));
    drop(c);
    let dev = h.join().unwrap();
    assert_eq!(dev.config(), &RunConfig::default());
}

#[test]
fn tamper_lockout_over_tcp() {
    let mut dev = Device::new(RunConfig::default()).unwrap();
    dev.inject_fault(Fault::RandomCodes(0.10));
    let (addr, h) = spawn(dev);
    let mut c = Client::new(TcpStream::connect(addr).unwrap());
    assert!(matches!(
        c.get_random(16),
        Err(ClientError::Device(err::TAMPER_LOCKOUT))
    ));
    let st = c.get_status().unwrap();
    assert!(st.flags.contains(TamperFlags::OFF_BRANCH));
    // raw samples stay available for diagnosis
    assert_eq!(c.get_raw(10).unwrap().len(), 10);
    assert!(matches!(
        c.get_random(16),
        Err(ClientError::Device(err::TAMPER_LOCKOUT))
    ));
    // reconfiguring restarts a healthy loop
    c.set_config("seed = 1").unwrap();
    assert_eq!(c.get_random(16).unwrap().len(), 16);
    drop(c);
    h.join().unwrap();
}

#[test]
fn corrupted_request_gets_bad_frame_reply() {
    let (addr, h) = spawn(Device::new(RunConfig::default()).unwrap());
    let mut s = TcpStream::connect(addr).unwrap();
    let mut bad = Frame::new(cmd::GET_STATUS, vec![]).unwrap().encode();
    bad[5] ^= 0xFF;
    use std::io::{Read, Write};
    s.write_all(&bad).unwrap();
    let mut reply = [0u8; 7];
    s.read_exact(&mut reply).unwrap();
    assert_eq!(
        decode_frame(&reply).unwrap(),
        Frame::new(cmd::ERROR, vec![err::BAD_FRAME]).unwrap()
    );
    drop(s);
    h.join().unwrap();
}

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, ToSocketAddrs};

use crate::protocol::{read_frame, write_frame};
use crate::service::{Reply, Service};

pub fn write_reply<W: Write>(w: &mut W, reply: &Reply) -> io::Result<()> {
    let json = serde_json::to_vec(&reply.response).expect("responses always serialize");
    write_frame(w, &json)?;
    for chunk in &reply.chunks {
        write_frame(w, chunk)?;
    }
    w.flush()
}

/// Serves requests from `reader` until it closes. Each request is answered
/// in full before the next is read.
pub fn serve_stream<R: Read, W: Write>(service: &mut Service, reader: R, writer: W) -> io::Result<()> {
    let mut reader = BufReader::new(reader);
    let mut writer = BufWriter::new(writer);
    while let Some(frame) = read_frame(&mut reader)? {
        let reply = service.handle_bytes(&frame);
        write_reply(&mut writer, &reply)?;
    }
    Ok(())
}

/// Accepts a single client on `listener` and serves it until it disconnects.
pub fn serve_listener(listener: &TcpListener, service: &mut Service) -> io::Result<()> {
    let (stream, _) = listener.accept()?;
    stream.set_nodelay(true)?;
    serve_stream(service, stream.try_clone()?, stream)
}

pub fn serve(addr: impl ToSocketAddrs, service: &mut Service) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve_listener(&listener, service)
}

//! IO companion to `assistvr-core`: record logs, session scripts, the
//! command-line tool and the HTTP/websocket service.

pub mod cli;
pub mod interactive;
pub mod records;
pub mod scriptfile;
pub mod service;

//! Layered multicast transport with dynamic channels.

pub mod carousel;
pub mod channel;
pub mod fec;
pub mod netsim;
pub mod receiver;
pub mod scalar;
pub mod sequencer;
pub mod transfer;
pub mod wire;

pub type ChannelConfig = channel::ChannelConfig<f64>;
pub type ChannelConfigF32 = channel::ChannelConfig<f32>;
pub type TileBudget = channel::TileBudget<f64>;
pub type Sequencer = sequencer::Sequencer<f64>;
pub type SequencedPacket = sequencer::SequencedPacket<f64>;

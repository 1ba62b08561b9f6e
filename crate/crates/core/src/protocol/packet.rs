/// `acc += src` in the packet group (bytewise XOR, so also `acc -= src`).
pub fn xor_into(acc: &mut [u8], src: &[u8]) {
    debug_assert_eq!(acc.len(), src.len());
    for (a, s) in acc.iter_mut().zip(src) {
        *a ^= s;
    }
}

pub fn zero_packet(len: usize) -> Vec<u8> {
    vec![0; len]
}

//! Single-core pinning for stable timings.

/// Pins the calling thread to one logical core. Returns false when the
/// platform or the sandbox does not allow it; measurements still run, just
/// with more scheduler noise.
#[cfg(target_os = "linux")]
pub fn pin_to_core(core: usize) -> bool {
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(core, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
pub fn pin_to_core(_core: usize) -> bool {
    false
}

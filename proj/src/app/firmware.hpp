#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace meshroll {

// The emulated firmware binary: pseudorandom, content-addressable bytes so a
// reassembled image can be checked against the generator without shipping a
// real blob.
struct FirmwareImage {
    std::uint64_t size_bytes = 102'400;  // 100 KiB
    std::uint64_t content_seed = 1;

    std::uint8_t byte_at(std::uint64_t i) const;
    std::vector<std::uint8_t> bytes(std::uint64_t offset, std::uint64_t len) const;
};

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF.
std::uint16_t crc16_ccitt(std::span<const std::uint8_t> data);

struct DataPacket {
    std::uint32_t seq = 0;
    std::uint32_t total = 0;
    std::vector<std::uint8_t> payload;
    std::uint16_t checksum = 0;  // over (seq, total, payload)

    // Application header on the wire: seq(2) + total(2) + checksum(2).
    // Unicast stacks add src(2) + dst(2) and any routing header on top.
    static constexpr int kHeaderBytes = 6;
    int frame_bytes() const { return kHeaderBytes + static_cast<int>(payload.size()); }
};

std::uint16_t packet_checksum(std::uint32_t seq, std::uint32_t total,
                              std::span<const std::uint8_t> payload);

// ceil(size / max_payload) packets, all full except possibly the last,
// seq dense from 0.
std::vector<DataPacket> packetize(const FirmwareImage& image, int max_payload_bytes);

}  // namespace meshroll

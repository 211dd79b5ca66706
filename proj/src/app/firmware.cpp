#include "app/firmware.hpp"

#include <stdexcept>

#include "core/rng.hpp"

namespace meshroll {

std::uint8_t FirmwareImage::byte_at(std::uint64_t i) const {
    std::uint64_t block = mix64(content_seed ^ mix64(i >> 3));
    return static_cast<std::uint8_t>(block >> ((i & 7) * 8));
}

std::vector<std::uint8_t> FirmwareImage::bytes(std::uint64_t offset, std::uint64_t len) const {
    std::vector<std::uint8_t> out(len);
    for (std::uint64_t i = 0; i < len; ++i) out[i] = byte_at(offset + i);
    return out;
}

std::uint16_t crc16_ccitt(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int i = 0; i < 8; ++i) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
    }
    return crc;
}

std::uint16_t packet_checksum(std::uint32_t seq, std::uint32_t total,
                              std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> buf;
    buf.reserve(8 + payload.size());
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(seq >> (8 * i)));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(total >> (8 * i)));
    buf.insert(buf.end(), payload.begin(), payload.end());
    return crc16_ccitt(buf);
}

std::vector<DataPacket> packetize(const FirmwareImage& image, int max_payload_bytes) {
    if (max_payload_bytes <= 0) throw std::invalid_argument("max_payload must be > 0");
    if (image.size_bytes == 0) throw std::invalid_argument("firmware image is empty");
    const std::uint64_t mp = static_cast<std::uint64_t>(max_payload_bytes);
    const std::uint32_t total = static_cast<std::uint32_t>((image.size_bytes + mp - 1) / mp);
    std::vector<DataPacket> packets;
    packets.reserve(total);
    for (std::uint32_t seq = 0; seq < total; ++seq) {
        DataPacket pkt;
        pkt.seq = seq;
        pkt.total = total;
        std::uint64_t offset = seq * mp;
        std::uint64_t len = std::min(mp, image.size_bytes - offset);
        pkt.payload = image.bytes(offset, len);
        pkt.checksum = packet_checksum(seq, total, pkt.payload);
        packets.push_back(std::move(pkt));
    }
    return packets;
}

}  // namespace meshroll

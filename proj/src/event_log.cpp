#include "wi/event_log.hpp"

#include <zlib.h>

#include "wi/types.hpp"

namespace wi {

namespace {

class DecodeError : public Error {
public:
    using Error::Error;
};

std::uint32_t load_u32(std::string_view s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[at + static_cast<std::size_t>(i)]);
    return v;
}

}  // namespace

std::uint32_t checksum(std::string_view payload) {
    auto c = crc32(0L, Z_NULL, 0);
    c = crc32(c, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
    return static_cast<std::uint32_t>(c);
}

std::size_t EventLog::append(std::string_view payload) {
    const auto at = bytes_.size();
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.u32(checksum(payload));
    bytes_ += w.view();
    bytes_.append(payload);
    ++records_;
    return at;
}

FramedRecords read_records(std::string_view log) {
    FramedRecords out;
    std::size_t pos = 0;
    while (pos < log.size()) {
        if (log.size() - pos < EventLog::kHeaderSize) {
            out.error = CorruptRecord{pos, "truncated record header"};
            break;
        }
        const auto len = load_u32(log, pos);
        const auto sum = load_u32(log, pos + 4);
        if (log.size() - pos - EventLog::kHeaderSize < len) {
            out.error = CorruptRecord{pos, "truncated record payload"};
            break;
        }
        const auto payload = log.substr(pos + EventLog::kHeaderSize, len);
        if (checksum(payload) != sum) {
            out.error = CorruptRecord{pos, "checksum mismatch"};
            break;
        }
        out.payloads.push_back(payload);
        pos += EventLog::kHeaderSize + len;
    }
    out.good_bytes = pos;
    return out;
}

// ---------------------------------------------------------------------------

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
}

void ByteReader::need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("unexpected end of buffer at byte " + std::to_string(pos_));
}

std::uint8_t ByteReader::u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
}

std::uint32_t ByteReader::u32() {
    need(4);
    auto v = load_u32(in_, pos_);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
}

std::string ByteReader::str() {
    const auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
}

}  // namespace wi

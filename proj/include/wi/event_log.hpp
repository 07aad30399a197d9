#pragma once

// Append-only record log. Each record is framed as
//   [u32 length][u32 crc32][payload bytes]
// with both integers little-endian and the checksum taken over the payload.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wi {

using Bytes = std::string;

class EventLog {
public:
    static constexpr std::size_t kHeaderSize = 8;

    /// Returns the byte offset at which the record starts.
    std::size_t append(std::string_view payload);

    const Bytes& bytes() const { return bytes_; }
    std::size_t size() const { return bytes_.size(); }
    std::size_t record_count() const { return records_; }

private:
    Bytes bytes_;
    std::size_t records_ = 0;
};

struct CorruptRecord {
    std::size_t offset = 0;  // start of the first bad record
    std::string reason;
};

struct FramedRecords {
    std::vector<std::string_view> payloads;  // views into the input
    std::optional<CorruptRecord> error;
    std::size_t good_bytes = 0;
};

/// Splits a log into record payloads, stopping at the first truncated or
/// checksum-mismatched record.
FramedRecords read_records(std::string_view log);

std::uint32_t checksum(std::string_view payload);

// Little-endian primitive encoding shared by the codecs.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void str(std::string_view s);

    Bytes take() { return std::move(out_); }
    const Bytes& view() const { return out_; }

private:
    Bytes out_;
};

/// Reader over an encoded buffer; throws DecodeError on underflow.
class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::string str();

    bool done() const { return pos_ == in_.size(); }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const;
    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace wi

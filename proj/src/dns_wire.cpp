#include "nsflow/dns_wire.hpp"

#include "nsflow/errors.hpp"

namespace nsflow::dns {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> wire) : wire_(wire) {}

    bool read_u8(std::size_t& pos, std::uint8_t& v) const {
        if (pos + 1 > wire_.size()) return false;
        v = wire_[pos++];
        return true;
    }
    bool read_u16(std::size_t& pos, std::uint16_t& v) const {
        if (pos + 2 > wire_.size()) return false;
        v = static_cast<std::uint16_t>((wire_[pos] << 8) | wire_[pos + 1]);
        pos += 2;
        return true;
    }
    bool read_u32(std::size_t& pos, std::uint32_t& v) const {
        if (pos + 4 > wire_.size()) return false;
        v = (static_cast<std::uint32_t>(wire_[pos]) << 24) |
            (static_cast<std::uint32_t>(wire_[pos + 1]) << 16) |
            (static_cast<std::uint32_t>(wire_[pos + 2]) << 8) |
            static_cast<std::uint32_t>(wire_[pos + 3]);
        pos += 4;
        return true;
    }

    // Decodes a possibly-compressed name starting at pos; pos advances past
    // the in-place representation. Jump count is bounded to defeat loops.
    bool read_name(std::size_t& pos, std::string& out) const {
        out.clear();
        std::size_t cursor = pos;
        bool jumped = false;
        int jumps = 0;
        while (true) {
            if (cursor >= wire_.size()) return false;
            std::uint8_t len = wire_[cursor];
            if ((len & 0xC0) == 0xC0) {
                if (cursor + 2 > wire_.size()) return false;
                if (++jumps > 64) return false;
                std::size_t target = ((len & 0x3F) << 8) | wire_[cursor + 1];
                if (!jumped) pos = cursor + 2;
                jumped = true;
                if (target >= cursor) return false;  // forward pointers are invalid
                cursor = target;
                continue;
            }
            if ((len & 0xC0) != 0) return false;
            ++cursor;
            if (len == 0) {
                if (!jumped) pos = cursor;
                return true;
            }
            if (cursor + len > wire_.size()) return false;
            if (!out.empty()) out.push_back('.');
            out.append(reinterpret_cast<const char*>(wire_.data() + cursor), len);
            cursor += len;
            if (out.size() > 255) return false;
        }
    }

private:
    std::span<const std::uint8_t> wire_;
};

}  // namespace

std::vector<std::uint8_t> encode_query(std::uint16_t id, const DomainName& name,
                                       std::uint16_t qtype) {
    std::vector<std::uint8_t> out;
    out.reserve(17 + name.size());
    put_u16(out, id);
    put_u16(out, 0x0100);  // RD=1
    put_u16(out, 1);       // QDCOUNT
    put_u16(out, 0);       // ANCOUNT
    put_u16(out, 0);       // NSCOUNT
    put_u16(out, 0);       // ARCOUNT

    if (name.size() > 253) throw FormatError("dns: name too long: " + name);
    std::size_t start = 0;
    while (start <= name.size()) {
        auto dot = name.find('.', start);
        std::size_t end = dot == std::string::npos ? name.size() : dot;
        std::size_t len = end - start;
        if (len == 0 || len > 63) throw FormatError("dns: bad label in name: " + name);
        out.push_back(static_cast<std::uint8_t>(len));
        out.insert(out.end(), name.begin() + static_cast<std::ptrdiff_t>(start),
                   name.begin() + static_cast<std::ptrdiff_t>(end));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    out.push_back(0);
    put_u16(out, qtype);
    put_u16(out, kClassIN);
    return out;
}

std::optional<Message> parse_message(std::span<const std::uint8_t> wire) {
    Reader reader(wire);
    std::size_t pos = 0;

    Message msg;
    std::uint16_t flags = 0, qdcount = 0, ancount = 0, nscount = 0, arcount = 0;
    if (!reader.read_u16(pos, msg.id) || !reader.read_u16(pos, flags) ||
        !reader.read_u16(pos, qdcount) || !reader.read_u16(pos, ancount) ||
        !reader.read_u16(pos, nscount) || !reader.read_u16(pos, arcount)) {
        return std::nullopt;
    }
    msg.truncated = (flags & 0x0200) != 0;
    msg.authoritative = (flags & 0x0400) != 0;
    msg.rcode = flags & 0x000F;

    for (std::uint16_t q = 0; q < qdcount; ++q) {
        std::string qname;
        std::uint16_t qtype = 0, qclass = 0;
        if (!reader.read_name(pos, qname) || !reader.read_u16(pos, qtype) ||
            !reader.read_u16(pos, qclass)) {
            return std::nullopt;
        }
        if (q == 0) {
            msg.question_name = qname;
            msg.question_type = qtype;
        }
    }

    for (std::uint16_t a = 0; a < ancount; ++a) {
        ResourceRecord rr;
        std::uint16_t rdlength = 0;
        if (!reader.read_name(pos, rr.name) || !reader.read_u16(pos, rr.type) ||
            !reader.read_u16(pos, rr.klass) || !reader.read_u32(pos, rr.ttl) ||
            !reader.read_u16(pos, rdlength)) {
            return std::nullopt;
        }
        if (pos + rdlength > wire.size()) return std::nullopt;
        rr.rdata.assign(wire.begin() + static_cast<std::ptrdiff_t>(pos),
                        wire.begin() + static_cast<std::ptrdiff_t>(pos + rdlength));
        if (rr.type == kTypeNS || rr.type == kTypeCNAME) {
            std::size_t name_pos = pos;
            if (!reader.read_name(name_pos, rr.rdata_name)) return std::nullopt;
        }
        pos += rdlength;
        msg.answers.push_back(std::move(rr));
    }
    // Authority and additional sections are not needed by the stub client.
    return msg;
}

}  // namespace nsflow::dns

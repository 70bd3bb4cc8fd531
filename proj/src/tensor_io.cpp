#include "condiquant/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>

namespace cq {

namespace {

constexpr char kMagic[8] = {'C', 'Q', 'T', 'E', 'N', 'S', 'O', 'R'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<std::uint8_t>((bits >> shift) & 0xff));
    }
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | (byte() << 8)); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int shift = 0; shift < 32; shift += 8) v |= static_cast<std::uint32_t>(byte()) << shift;
        return v;
    }

    double f64() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 8) v |= static_cast<std::uint64_t>(byte()) << shift;
        return std::bit_cast<double>(v);
    }

    std::string str(std::size_t len) {
        require(len);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
        pos_ += len;
        return s;
    }

    void require(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw FormatError("container truncated");
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::uint32_t byte() {
        require(1);
        return bytes_[pos_++];
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_container(const NamedMatrices& matrices) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u16(out, kVersion);
    if (matrices.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("too many entries for the container format");
    }
    put_u32(out, static_cast<std::uint32_t>(matrices.size()));

    std::set<std::string> names;
    for (const auto& [name, matrix] : matrices) {
        if (!names.insert(name).second) {
            throw FormatError("duplicate entry name '" + name + "'");
        }
        if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw FormatError("entry name too long: '" + name.substr(0, 32) + "...'");
        }
        put_u16(out, static_cast<std::uint16_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_u32(out, static_cast<std::uint32_t>(matrix.rows()));
        put_u32(out, static_cast<std::uint32_t>(matrix.cols()));
        for (double v : matrix.data()) put_f64(out, v);
    }
    return out;
}

NamedMatrices decode_container(const std::vector<std::uint8_t>& bytes) {
    Reader reader(bytes);
    reader.require(8);
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw FormatError("bad magic: not a CQTENSOR container");
    }
    reader.str(8);  // consume the magic
    const std::uint16_t version = reader.u16();
    if (version != kVersion) {
        throw FormatError("unsupported container version " + std::to_string(version));
    }
    const std::uint32_t count = reader.u32();

    NamedMatrices result;
    std::set<std::string> names;
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::uint16_t name_len = reader.u16();
        std::string name = reader.str(name_len);
        if (!names.insert(name).second) {
            throw FormatError("duplicate entry name '" + name + "'");
        }
        const std::uint32_t rows = reader.u32();
        const std::uint32_t cols = reader.u32();
        if (rows == 0 || cols == 0) {
            throw FormatError("entry '" + name + "' declares an empty shape");
        }
        const std::size_t n = static_cast<std::size_t>(rows) * cols;
        reader.require(n * 8);
        std::vector<double> data(n);
        for (double& v : data) v = reader.f64();
        try {
            result.emplace_back(std::move(name), Matrix(rows, cols, std::move(data)));
        } catch (const NumericalError&) {
            throw FormatError("entry holds non-finite values");
        }
    }
    if (reader.remaining() != 0) {
        throw FormatError("trailing bytes after the last entry");
    }
    return result;
}

void write_container(const std::filesystem::path& path, const NamedMatrices& matrices) {
    const std::vector<std::uint8_t> bytes = encode_container(matrices);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

NamedMatrices read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_container(bytes);
}

}  // namespace cq

#include "mednns/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mednns/errors.hpp"
#include "mednns/rng.hpp"

namespace mednns {

namespace {

constexpr char kWeightMagic[8] = {'M', 'N', 'N', 'S', 'W', '0', '0', '1'};

template <typename T>
void write_le(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
    if (!out) throw DataError("binary write failed");
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw DataError("truncated read of " + what + " at offset " +
                        std::to_string(static_cast<long long>(in.tellg())));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { write_le(out, v); }
void write_u16(std::ostream& out, std::uint16_t v) { write_le(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f32(std::ostream& out, float v) { write_le(out, v); }

std::uint8_t read_u8(std::istream& in, const std::string& what) { return read_le<std::uint8_t>(in, what); }
std::uint16_t read_u16(std::istream& in, const std::string& what) { return read_le<std::uint16_t>(in, what); }
std::uint32_t read_u32(std::istream& in, const std::string& what) { return read_le<std::uint32_t>(in, what); }
std::uint64_t read_u64(std::istream& in, const std::string& what) { return read_le<std::uint64_t>(in, what); }
float read_f32(std::istream& in, const std::string& what) { return read_le<float>(in, what); }

namespace {

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

void save_tensors(const std::string& path, const std::vector<const Tensor*>& tensors) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(kWeightMagic, sizeof(kWeightMagic));
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const Tensor* t : tensors) {
        write_u32(out, static_cast<std::uint32_t>(t->rank()));
        for (std::size_t d : t->shape()) write_u32(out, static_cast<std::uint32_t>(d));
        for (std::size_t i = 0; i < t->size(); ++i) write_f32(out, (*t)[i]);
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<Tensor> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != 8 || std::memcmp(magic, kWeightMagic, 8) != 0)
        throw DataError("bad magic in weight file: " + path);
    const std::uint32_t count = read_u32(in, "tensor count");
    std::vector<Tensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::uint32_t rank = read_u32(in, "tensor rank");
        if (rank > 8) throw DataError("implausible tensor rank in " + path);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = read_u32(in, "tensor dim");
        std::vector<float> data(shape_numel(shape));
        for (auto& v : data) v = read_f32(in, "tensor payload");
        tensors.emplace_back(std::move(shape), std::move(data));
    }
    return tensors;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::uint64_t file_fingerprint(const std::string& path) {
    const std::string bytes = read_text_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace mednns

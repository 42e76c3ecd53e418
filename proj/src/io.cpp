#include "ttscale/io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "ttscale/question.hpp"

namespace ttscale {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

[[noreturn]] void fail_errno(const std::string& what, const std::filesystem::path& path) {
  throw std::runtime_error(what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::string tmpl = (dir / ("." + path.filename().string() + ".tmp-XXXXXX")).string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) fail_errno("cannot create temporary file for", path);
  const std::filesystem::path tmp = tmpl;

  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      std::filesystem::remove(tmp);
      fail_errno("cannot write", tmp);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fchmod(fd, 0644) != 0 || ::fsync(fd) != 0) {
    ::close(fd);
    std::filesystem::remove(tmp);
    fail_errno("cannot sync", tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    std::filesystem::remove(tmp);
    fail_errno("cannot rename onto", path);
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void ArtifactHeader::add_input(const std::filesystem::path& path) {
  input_digests[path.string()] = sha256_file(path);
}

nlohmann::json ArtifactHeader::to_json() const {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, digest] : input_digests) inputs[path] = "sha256:" + digest;
  return {{"tool", "ttscale"}, {"version", kToolVersion}, {"config", config}, {"inputs", inputs}};
}

std::string jsonl_with_header(const ArtifactHeader& header,
                              const std::vector<nlohmann::json>& records) {
  std::string out = nlohmann::json{{kMetaKey, header.to_json()}}.dump() + '\n';
  for (const auto& r : records) out += r.dump() + '\n';
  return out;
}

std::string json_with_header(const ArtifactHeader& header, nlohmann::json body) {
  body[kMetaKey] = header.to_json();
  return body.dump(2) + '\n';
}

std::filesystem::path meta_sidecar(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".meta.json";
  return p;
}

}  // namespace ttscale

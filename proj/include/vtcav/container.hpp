#pragma once

#include <map>
#include <string>

#include "vtcav/tensor.hpp"

namespace vtcav {

// Tensor container file layout:
//   8-byte magic "VTCAVTN1"
//   u64 little-endian manifest byte length
//   UTF-8 JSON manifest: name -> {dtype:"f32", shape:[...], byte_offset, byte_length}
//   raw little-endian float32 payload
// byte_offset is relative to the start of the payload section.
void write_tensor_container(const std::string& path, const std::map<std::string, Tensor>& entries);

std::map<std::string, Tensor> read_tensor_container(const std::string& path);

}  // namespace vtcav

#pragma once

namespace pcattn {

enum class Task { classification, segmentation };

}  // namespace pcattn

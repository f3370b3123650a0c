// include/xvec/base/process.h

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVEC_BASE_PROCESS_H_
#define XVEC_BASE_PROCESS_H_

namespace xvec {

/// Raises the glibc mmap and trim thresholds so that large tensor buffers
/// are recycled by the allocator rather than mapped and unmapped on every
/// training step. No-op on other C libraries.
void TuneAllocator();

}  // namespace xvec

#endif  // XVEC_BASE_PROCESS_H_

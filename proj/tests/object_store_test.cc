/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "edsp/object_store.h"
#include "support/test_support.h"

namespace edsp {
namespace {

BlobKey Key(std::string_view path) { return BlobKey::Make(path).value(); }

TEST(BlobKeyTest, RejectsUnsafePaths) {
  for (std::string_view bad : {"", "/abs", "a//b", "a/", "./a", "a/../b", "..", ".edsp/x",
                               "a\\b", "\xff"}) {
    EXPECT_FALSE(BlobKey::Make(bad).has_value()) << bad;
  }
  EXPECT_FALSE(BlobKey::Make(std::string(kMaxKeyBytes + 1, 'a')).has_value());
  EXPECT_FALSE(BlobKey::Make(std::string("a\0b", 3)).has_value());
  for (std::string_view good : {"a", "a/b.c", "data/x.ecf", "東京/file", "a/.edsp"}) {
    EXPECT_TRUE(BlobKey::Make(good).has_value()) << good;
  }
  EXPECT_EQ(Key("a/b").Join("c/d")->str(), "a/b/c/d");
  EXPECT_FALSE(Key("a").Join("../b").has_value());
}

enum class Backend { kLocal, kMemory };

class ObjectStoreTest : public ::testing::TestWithParam<Backend> {
 protected:
  void SetUp() override {
    if (GetParam() == Backend::kLocal) {
      store_ = testing::OpenLocalStore(dir_.path() / "store");
    } else {
      store_ = std::make_unique<InMemoryObjectStore>();
    }
  }

  testing::TempDir dir_;
  std::unique_ptr<ObjectStore> store_;
};

TEST_P(ObjectStoreTest, PutGetDeleteSize) {
  std::string payload("bin\0ary", 7);
  ASSERT_TRUE(store_->Put(Key("t/a.bin"), payload).has_value());
  EXPECT_EQ(*store_->Get(Key("t/a.bin")), payload);
  EXPECT_EQ(*store_->Size(Key("t/a.bin")), 7u);
  ASSERT_TRUE(store_->Put(Key("t/a.bin"), "v2").has_value());
  EXPECT_EQ(*store_->Get(Key("t/a.bin")), "v2");
  ASSERT_TRUE(store_->Delete(Key("t/a.bin")).has_value());
  EXPECT_EQ(store_->Get(Key("t/a.bin")).error().kind, ErrorKind::kNotFound);
  EXPECT_EQ(store_->Size(Key("t/a.bin")).error().kind, ErrorKind::kNotFound);
  ASSERT_TRUE(store_->Put(Key("t/empty"), "").has_value());
  EXPECT_EQ(*store_->Get(Key("t/empty")), "");
}

TEST_P(ObjectStoreTest, GetRange) {
  ASSERT_TRUE(store_->Put(Key("r"), "0123456789").has_value());
  EXPECT_EQ(*store_->GetRange(Key("r"), 2, 3), "234");
  EXPECT_EQ(*store_->GetRange(Key("r"), 10, 0), "");
  EXPECT_EQ(store_->GetRange(Key("r"), 8, 3).error().kind, ErrorKind::kTruncatedFile);
  EXPECT_EQ(store_->GetRange(Key("missing"), 0, 1).error().kind, ErrorKind::kNotFound);
}

TEST_P(ObjectStoreTest, ListIsSortedPrefixMatch) {
  for (auto k : {"b/2", "a/1", "b/1", "ba/1", "c"}) {
    ASSERT_TRUE(store_->Put(Key(k), k).has_value());
  }
  auto listed = store_->List("b/");
  ASSERT_TRUE(listed.has_value());
  std::vector<std::string> names;
  for (const auto& k : *listed) names.push_back(k.str());
  EXPECT_EQ(names, (std::vector<std::string>{"b/1", "b/2"}));
  names.clear();
  auto everything = store_->List("");
  ASSERT_TRUE(everything.has_value());
  for (const auto& k : *everything) names.push_back(k.str());
  EXPECT_EQ(names, (std::vector<std::string>{"a/1", "b/1", "b/2", "ba/1", "c"}));
  EXPECT_TRUE(store_->List("zzz")->empty());
}

TEST_P(ObjectStoreTest, RecreatedKeyNeverReusesToken) {
  ASSERT_TRUE(store_->Put(Key("r"), "first").has_value());
  auto before = store_->GetVersioned(Key("r"));
  ASSERT_TRUE(before.has_value());
  ASSERT_TRUE(store_->Delete(Key("r")).has_value());
  ASSERT_TRUE(store_->Put(Key("r"), "first").has_value());
  EXPECT_EQ(store_->PutIfMatches(Key("r"), "stale", before->token).error().kind,
            ErrorKind::kPreconditionFailed);
  auto after = store_->GetVersioned(Key("r"));
  ASSERT_TRUE(after.has_value());
  EXPECT_NE(after->token, before->token);
  EXPECT_TRUE(store_->PutIfMatches(Key("r"), "fresh", after->token).has_value());
  EXPECT_EQ(*store_->Get(Key("r")), "fresh");
}

TEST_P(ObjectStoreTest, ConditionalPut) {
  auto created = store_->PutIfMatches(Key("p"), "one", std::nullopt);
  ASSERT_TRUE(created.has_value());
  EXPECT_EQ(store_->PutIfMatches(Key("p"), "dup", std::nullopt).error().kind,
            ErrorKind::kPreconditionFailed);
  auto versioned = store_->GetVersioned(Key("p"));
  ASSERT_TRUE(versioned.has_value());
  EXPECT_EQ(versioned->bytes, "one");
  EXPECT_EQ(versioned->token, *created);
  auto second = store_->PutIfMatches(Key("p"), "two", *created);
  ASSERT_TRUE(second.has_value());
  EXPECT_NE(*second, *created);
  EXPECT_EQ(store_->PutIfMatches(Key("p"), "stale", *created).error().kind,
            ErrorKind::kPreconditionFailed);
  EXPECT_EQ(*store_->Get(Key("p")), "two");
  // An unconditional put also invalidates outstanding tokens.
  ASSERT_TRUE(store_->Put(Key("p"), "three").has_value());
  EXPECT_FALSE(store_->PutIfMatches(Key("p"), "four", *second).has_value());
}

// Every thread increments a shared counter by read-modify-CAS. Lost updates
// would leave the total short.
TEST_P(ObjectStoreTest, ConcurrentCompareAndSwapLosesNoUpdates) {
  constexpr int kThreads = 8;
  constexpr int kIncrements = 40;
  ASSERT_TRUE(store_->PutIfMatches(Key("counter"), "0", std::nullopt).has_value());
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < kIncrements; ++i) {
        while (true) {
          auto current = store_->GetVersioned(Key("counter"));
          if (!current.has_value()) {
            ++failures;
            return;
          }
          int next = std::stoi(current->bytes) + 1;
          auto put = store_->PutIfMatches(Key("counter"), std::to_string(next), current->token);
          if (put.has_value()) break;
          if (put.error().kind != ErrorKind::kPreconditionFailed) {
            ++failures;
            return;
          }
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(*store_->Get(Key("counter")), std::to_string(kThreads * kIncrements));
}

INSTANTIATE_TEST_SUITE_P(Backends, ObjectStoreTest,
                         ::testing::Values(Backend::kLocal, Backend::kMemory),
                         [](const auto& info) {
                           return info.param == Backend::kLocal ? "Local" : "Memory";
                         });

TEST(LocalObjectStoreTest, CompareAndSwapAcrossProcesses) {
  testing::TempDir dir;
  auto root = dir.path() / "store";
  {
    auto store = testing::OpenLocalStore(root);
    ASSERT_TRUE(store->PutIfMatches(Key("counter"), "0", std::nullopt).has_value());
  }
  constexpr int kProcesses = 4;
  constexpr int kIncrements = 25;
  std::vector<pid_t> children;
  for (int p = 0; p < kProcesses; ++p) {
    pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      auto store = LocalObjectStore::Open(root, LocalStoreOptions{false});
      if (!store.has_value()) _exit(3);
      for (int i = 0; i < kIncrements; ++i) {
        while (true) {
          auto current = (*store)->GetVersioned(Key("counter"));
          if (!current.has_value()) _exit(4);
          int next = std::stoi(current->bytes) + 1;
          auto put =
              (*store)->PutIfMatches(Key("counter"), std::to_string(next), current->token);
          if (put.has_value()) break;
          if (put.error().kind != ErrorKind::kPreconditionFailed) _exit(5);
        }
      }
      _exit(0);
    }
    children.push_back(pid);
  }
  for (pid_t pid : children) {
    int status = 0;
    ASSERT_EQ(waitpid(pid, &status, 0), pid);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
  }
  auto store = testing::OpenLocalStore(root);
  EXPECT_EQ(*store->Get(Key("counter")), std::to_string(kProcesses * kIncrements));
}

TEST(LocalObjectStoreTest, OpenRequiresExistingRoot) {
  testing::TempDir dir;
  EXPECT_FALSE(LocalObjectStore::Open(dir.path() / "absent").has_value());
  EXPECT_TRUE(LocalObjectStore::Create(dir.path() / "absent").has_value());
  EXPECT_TRUE(LocalObjectStore::Open(dir.path() / "absent").has_value());
}

TEST(LocalObjectStoreTest, ListHidesInternalFiles) {
  testing::TempDir dir;
  auto store = testing::OpenLocalStore(dir.path());
  ASSERT_TRUE(store->PutIfMatches(Key("x/p"), "1", std::nullopt).has_value());
  auto keys = store->List("");
  ASSERT_TRUE(keys.has_value());
  ASSERT_EQ(keys->size(), 1u);
  EXPECT_EQ(keys->front().str(), "x/p");
}

}  // namespace
}  // namespace edsp

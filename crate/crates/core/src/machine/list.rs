use std::fmt;
use std::sync::Arc;

/// A persistent singly-linked list. Pushing and popping share the tail, so
/// snapshots of stacks and dumps are O(1).
pub struct List<T>(Option<Arc<Node<T>>>);

struct Node<T> {
    head: T,
    tail: List<T>,
    len: usize,
}

impl<T> List<T> {
    pub const fn new() -> List<T> {
        List(None)
    }

    pub fn push(&self, head: T) -> List<T> {
        List(Some(Arc::new(Node {
            head,
            tail: self.clone(),
            len: self.len() + 1,
        })))
    }

    /// The head and the tail, or `None` on the empty list.
    pub fn pop(&self) -> Option<(&T, &List<T>)> {
        self.0.as_deref().map(|n| (&n.head, &n.tail))
    }

    pub fn head(&self) -> Option<&T> {
        self.pop().map(|(h, _)| h)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |n| n.len)
    }

    /// From the head to the last element.
    pub fn iter(&self) -> Iter<'_, T> {
        Iter(self)
    }
}

impl<T> Clone for List<T> {
    fn clone(&self) -> List<T> {
        List(self.0.clone())
    }
}

impl<T> Default for List<T> {
    fn default() -> List<T> {
        List::new()
    }
}

impl<T> Drop for List<T> {
    // Iterative, so that dropping a long list cannot overflow the stack.
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(node) = cur {
            match Arc::try_unwrap(node) {
                Ok(mut node) => cur = node.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}

impl<T> FromIterator<T> for List<T> {
    /// The first element of the iterator becomes the head.
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> List<T> {
        let items: Vec<T> = iter.into_iter().collect();
        items.into_iter().rev().fold(List::new(), |l, x| l.push(x))
    }
}

impl<T: fmt::Debug> fmt::Debug for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

pub struct Iter<'a, T>(&'a List<T>);

impl<'a, T> Iterator for Iter<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        let (h, t) = self.0.pop()?;
        self.0 = t;
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_pop_share_tails() {
        let a: List<u32> = List::new();
        let b = a.push(1);
        let c = b.push(2);
        assert_eq!(c.len(), 2);
        assert_eq!(c.iter().copied().collect::<Vec<_>>(), [2, 1]);
        let (h, t) = c.pop().unwrap();
        assert_eq!(*h, 2);
        assert_eq!(t.len(), 1);
        assert!(a.is_empty());
        assert_eq!(b.head(), Some(&1));
    }

    #[test]
    fn collects_head_first() {
        let l: List<u32> = [1, 2, 3].into_iter().collect();
        assert_eq!(l.head(), Some(&1));
        assert_eq!(l.iter().copied().collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn long_lists_drop() {
        let mut l = List::new();
        for i in 0..1_000_000u32 {
            l = l.push(i);
        }
        drop(l);
    }
}
